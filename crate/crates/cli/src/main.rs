//! Reproducible experiment driver for the sandpile laboratory. Every
//! subcommand assembles an [`spec::ExperimentSpec`]; the same spec can be
//! stored as JSON and replayed with `--config`, and reruns with the same
//! spec and seed produce byte-identical artifacts.

mod run;
mod spec;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use spec::{CommandKind, ExperimentSpec, OutputFormat};

#[derive(Parser)]
#[command(
    name = "sandpile",
    version,
    about = "Sandpile criticality laboratory: seeded experiments and exact cross-checks"
)]
struct Cli {
    /// Run the experiment described by a JSON spec file instead of
    /// subcommand flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for trial parallelism; defaults to $SANDPILE_WORKERS,
    /// then to all cores. Never affects numerical output.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct OutputArgs {
    /// Artifact path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Artifact format; defaults to the path extension, else csv.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Add particles at uniformly random sites until stabilization first
    /// fails; estimate the threshold density.
    Threshold {
        /// Graph family: cycle | bracelet | complete | torus | flower |
        /// random-regular.
        #[arg(long)]
        family: String,
        /// Family size: vertex count, torus side, or flower petal count.
        #[arg(long)]
        n: usize,
        /// Branching parameter for random-regular graphs, which are
        /// (q+1)-regular [default: 3].
        #[arg(long)]
        q: Option<usize>,
        /// Independent trials; trial i draws from substream i of the seed.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sample the driven sandpile chain in stationarity.
    Stationary {
        /// Graph family: cycle | bracelet | complete | ladder | flower |
        /// lollipop | wired-tree.
        #[arg(long)]
        family: String,
        /// Family size (wired-tree uses --q and --depth instead).
        #[arg(long)]
        n: Option<usize>,
        /// Wired-tree branching (non-sink degree q+1).
        #[arg(long)]
        q: Option<usize>,
        /// Wired-tree depth.
        #[arg(long)]
        depth: Option<usize>,
        /// Independent chains sampled, each with its own burn-in.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sample this vertex's height law instead of the global density.
        #[arg(long)]
        site: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Stabilize i.i.d. Poisson(lambda) heights and report the resulting
    /// density, per lambda.
    DensityResponse {
        /// Graph family: cycle | bracelet | complete | ladder | flower |
        /// lollipop | wired-tree.
        #[arg(long)]
        family: String,
        /// Family size (wired-tree uses --q and --depth instead).
        #[arg(long)]
        n: Option<usize>,
        /// Wired-tree branching.
        #[arg(long)]
        q: Option<usize>,
        /// Wired-tree depth.
        #[arg(long)]
        depth: Option<usize>,
        /// Comma-separated lambda grid, e.g. 1.0,2.0,2.8.
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run parallel chip-firing from i.i.d. Poisson(lambda) heights until
    /// the orbit repeats; report long-run activities, per lambda.
    ActivityResponse {
        /// Graph family: flower | cycle | bracelet | complete | torus.
        #[arg(long)]
        family: String,
        /// Family size: vertex count, torus side, or flower petal count.
        #[arg(long)]
        n: usize,
        /// Comma-separated lambda grid.
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Parallel-step budget per orbit search [default: 16 n + 65536].
        #[arg(long)]
        max_steps: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print closed-form constants: a per-family summary, or the full
    /// reference table with exactness flags ("analytic table").
    Analytic {
        /// Pass "table" for the full constant table.
        #[arg(value_parser = ["table"])]
        mode: Option<String>,
        /// Family summary: cycle | bracelet | flower | ladder | cayley |
        /// z2 | complete.
        #[arg(long)]
        family: Option<String>,
        /// Branching parameter for the cayley family.
        #[arg(long)]
        q: Option<usize>,
        /// Size parameter for the complete family.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run a named self-check suite; exits nonzero if any check fails.
    Verify {
        /// Suite: small-oracles | abelian | staircase | all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

impl Command {
    fn into_spec(self) -> ExperimentSpec {
        match self {
            Command::Threshold {
                family,
                n,
                q,
                trials,
                seed,
                out,
            } => {
                let mut s = ExperimentSpec::new(CommandKind::Threshold);
                s.family = Some(family);
                s.size = Some(n);
                s.q = q;
                s.n_trials = Some(trials);
                s.seed = seed;
                s.output = out.output;
                s.format = out.format;
                s
            }
            Command::Stationary {
                family,
                n,
                q,
                depth,
                samples,
                seed,
                site,
                out,
            } => {
                let mut s = ExperimentSpec::new(CommandKind::Stationary);
                s.family = Some(family);
                s.size = n;
                s.q = q;
                s.depth = depth;
                s.n_trials = Some(samples);
                s.seed = seed;
                s.site = site;
                s.output = out.output;
                s.format = out.format;
                s
            }
            Command::DensityResponse {
                family,
                n,
                q,
                depth,
                lambda,
                trials,
                seed,
                out,
            } => {
                let mut s = ExperimentSpec::new(CommandKind::DensityResponse);
                s.family = Some(family);
                s.size = n;
                s.q = q;
                s.depth = depth;
                s.lambda_grid = Some(lambda);
                s.n_trials = Some(trials);
                s.seed = seed;
                s.output = out.output;
                s.format = out.format;
                s
            }
            Command::ActivityResponse {
                family,
                n,
                lambda,
                trials,
                seed,
                max_steps,
                out,
            } => {
                let mut s = ExperimentSpec::new(CommandKind::ActivityResponse);
                s.family = Some(family);
                s.size = Some(n);
                s.lambda_grid = Some(lambda);
                s.n_trials = Some(trials);
                s.seed = seed;
                s.max_steps = max_steps;
                s.output = out.output;
                s.format = out.format;
                s
            }
            Command::Analytic {
                mode,
                family,
                q,
                n,
                out,
            } => {
                let mut s = ExperimentSpec::new(CommandKind::Analytic);
                s.table = mode.as_deref() == Some("table");
                s.family = family;
                s.q = q;
                s.size = n;
                s.output = out.output;
                s.format = out.format;
                s
            }
            Command::Verify { suite, seed, out } => {
                let mut s = ExperimentSpec::new(CommandKind::Verify);
                s.suite = Some(suite);
                s.seed = seed;
                s.output = out.output;
                s.format = out.format;
                s
            }
        }
    }
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { 0 } else { 1 };
        }
    };

    let workers = cli.workers.or_else(|| {
        std::env::var("SANDPILE_WORKERS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(w) = workers {
        if w > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
        }
    }

    let spec = match (cli.config, cli.command) {
        (Some(_), Some(_)) => {
            eprintln!("error: pass either --config or a subcommand, not both");
            return 1;
        }
        (None, None) => {
            eprintln!("error: missing subcommand or --config; see --help");
            return 1;
        }
        (Some(path), None) => {
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return 1;
                }
            };
            match ExperimentSpec::from_json(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: invalid spec: {e}");
                    return 1;
                }
            }
        }
        (None, Some(cmd)) => cmd.into_spec(),
    };
    run::execute(&spec)
}

fn main() {
    std::process::exit(real_main());
}
