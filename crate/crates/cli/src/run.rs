//! Experiment execution: builds the requested graph, runs the seeded
//! protocol, prints a summary to stdout, and writes the declared CSV or
//! JSON artifact. Exit status: 0 done, 1 invalid spec or failed checks,
//! 2 step-budget exhaustion.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use sandpile_core::analytic::{self, reference};
use sandpile_core::graph::{self, SinkedGraph, Topology, Torus};
use sandpile_core::montecarlo as mc;
use sandpile_core::rng::RngStream;
use sandpile_core::verify;
use sandpile_core::Error as CoreError;

use crate::spec::{CommandKind, ExperimentSpec, OutputFormat};

pub const TOOL: &str = concat!("sandpile ", env!("CARGO_PKG_VERSION"));

enum RunError {
    Invalid(String),
    Budget(String),
}

type RunResult<T> = Result<T, RunError>;

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> RunError {
        match e {
            CoreError::EnumerationBudget { .. }
            | CoreError::EdgeBudget { .. }
            | CoreError::OrbitBudget { .. } => RunError::Budget(e.to_string()),
            other => RunError::Invalid(other.to_string()),
        }
    }
}

/// Runs the spec and returns the process exit code.
pub fn execute(spec: &ExperimentSpec) -> i32 {
    let run = match spec.command {
        CommandKind::Threshold => run_threshold(spec),
        CommandKind::Stationary => run_stationary(spec),
        CommandKind::DensityResponse => run_density_response(spec),
        CommandKind::ActivityResponse => run_activity_response(spec),
        CommandKind::Analytic => run_analytic(spec),
        CommandKind::Verify => run_verify(spec),
    };
    match run {
        Ok(code) => code,
        Err(RunError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(RunError::Budget(msg)) => {
            eprintln!("error: budget exhausted: {msg}");
            2
        }
    }
}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Invalid(msg.into())
}

fn family_of(spec: &ExperimentSpec) -> RunResult<&str> {
    spec.family
        .as_deref()
        .ok_or_else(|| invalid("missing --family"))
}

fn size_of(spec: &ExperimentSpec) -> RunResult<usize> {
    spec.size.ok_or_else(|| invalid("missing --n"))
}

fn grid_of(spec: &ExperimentSpec) -> RunResult<&[f64]> {
    match spec.lambda_grid.as_deref() {
        Some(g) if !g.is_empty() => Ok(g),
        _ => Err(invalid("missing --lambda grid")),
    }
}

fn pick_format(spec: &ExperimentSpec) -> OutputFormat {
    if let Some(f) = spec.format {
        return f;
    }
    match &spec.output {
        Some(p) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    }
}

fn artifact_header(spec: &ExperimentSpec) -> String {
    format!("# {TOOL}\n# spec: {}\n", spec.to_json())
}

fn write_text(path: &Path, text: &str) -> RunResult<()> {
    fs::write(path, text)
        .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(spec: &ExperimentSpec, value: &T) -> RunResult<()> {
    if let Some(path) = &spec.output {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| invalid(format!("serialization failed: {e}")))?;
        text.push('\n');
        write_text(path, &text)?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn reference_value(name: &str) -> f64 {
    reference::constants()
        .iter()
        .find(|c| c.name == name)
        .map(|c| c.value)
        .expect("known reference name")
}

fn deviation_clause(mean: f64, stderr: f64, target: f64, label: &str) -> String {
    format!(
        " | {label} {:.6}, dev {:+.2} sigma",
        target,
        (mean - target) / stderr
    )
}

// ---------------------------------------------------------------- threshold

#[derive(Serialize)]
struct ThresholdJson<'a> {
    family: &'a str,
    size: usize,
    n_trials: usize,
    zeta_c_hat: f64,
    stderr: f64,
    marginals: Vec<f64>,
    mean_topples: f64,
}

fn trial_rows<F>(n_trials: usize, seed: u64, f: F) -> Result<Vec<mc::TrialResult>, CoreError>
where
    F: Fn(&mut RngStream) -> Result<mc::TrialResult, CoreError> + Sync,
{
    if n_trials < 2 {
        return Err(CoreError::TooFewTrials);
    }
    (0..n_trials as u64)
        .into_par_iter()
        .map(|i| f(&mut RngStream::new(seed, i)))
        .collect()
}

fn threshold_reference(family: &str, size: usize, q: usize) -> Option<(f64, &'static str)> {
    match family {
        "cycle" => Some((1.0, "limit")),
        "bracelet" => Some((analytic::bracelet_zeta_c(), "limit")),
        "flower" => Some((analytic::flower_zeta_c(), "limit")),
        "torus" => {
            let name = match size {
                64 => "torus64_zeta_c",
                256 => "torus256_zeta_c",
                _ => "z2_zeta_c",
            };
            Some((reference_value(name), "reference"))
        }
        "random-regular" => {
            let name = match (q, size) {
                (3, n) if n == 1 << 20 => "regular4_zeta_c_n2pow20",
                (4, n) if n == 1 << 20 => "regular5_zeta_c_n2pow20",
                (2, _) => "regular3_zeta_c",
                (3, _) => "regular4_zeta_c",
                (4, _) => "regular5_zeta_c",
                _ => return None,
            };
            Some((reference_value(name), "reference"))
        }
        _ => None,
    }
}

fn run_threshold(spec: &ExperimentSpec) -> RunResult<i32> {
    let family = family_of(spec)?;
    let size = size_of(spec)?;
    let n_trials = spec.n_trials.unwrap_or(1000);
    let seed = spec.seed;
    let q = spec.q.unwrap_or(3);

    let rows = match family {
        "cycle" => trial_rows(n_trials, seed, |rng| mc::threshold_trial_cycle(size, rng))?,
        "bracelet" => trial_rows(n_trials, seed, |rng| mc::threshold_trial_bracelet(size, rng))?,
        "complete" => trial_rows(n_trials, seed, |rng| mc::threshold_trial_complete(size, rng))?,
        "torus" => {
            let t = Torus::new(size)?;
            trial_rows(n_trials, seed, |rng| Ok(mc::threshold_trial(&t, rng)))?
        }
        "flower" => {
            let g = graph::flower(size)?;
            trial_rows(n_trials, seed, |rng| Ok(mc::threshold_trial(&g, rng)))?
        }
        "random-regular" => {
            graph::random_regular(q, size, &mut RngStream::new(seed, u64::MAX))?;
            trial_rows(n_trials, seed, |rng| {
                let g = graph::random_regular(q, size, rng).expect("parameters were vetted");
                Ok(mc::threshold_trial(&g, rng))
            })?
        }
        other => {
            return Err(invalid(format!(
                "unknown threshold family: {other} \
                 (known: cycle, bracelet, complete, torus, flower, random-regular)"
            )))
        }
    };
    let summary = mc::summarize_trials(&rows)?;

    let mut line = format!(
        "threshold family={family} size={size} trials={n_trials} seed={seed}: \
         zeta_c_hat = {:.6} +- {:.6}",
        summary.density.mean, summary.density.stderr
    );
    if let Some((target, label)) = threshold_reference(family, size, q) {
        line.push_str(&deviation_clause(
            summary.density.mean,
            summary.density.stderr,
            target,
            label,
        ));
    }
    if family == "complete" {
        let n = size as f64;
        let bound = n - 2.0 * (n * n.ln()).sqrt();
        let above = rows
            .iter()
            .filter(|r| r.m as f64 / r.n_sites as f64 >= bound)
            .count();
        let _ = write!(
            line,
            " | lower bound {:.4}, freq above = {:.6}",
            bound,
            above as f64 / rows.len() as f64
        );
    }
    println!("{line}");

    if let Some(path) = &spec.output {
        match pick_format(spec) {
            OutputFormat::Csv => {
                let mut text = artifact_header(spec);
                text.push_str(
                    "graph_family,size,seed,stream_id,m,density,\
                     h0,h1,h2,h3,h4,h5,h6,h7,h8plus,topples\n",
                );
                for (i, r) in rows.iter().enumerate() {
                    let _ = write!(text, "{family},{size},{seed},{i},{},", r.m);
                    let _ = write!(text, "{}", r.m as f64 / r.n_sites as f64);
                    for b in r.height_histogram {
                        let _ = write!(text, ",{b}");
                    }
                    let _ = writeln!(text, ",{}", r.total_topples);
                }
                write_text(path, &text)?;
            }
            OutputFormat::Json => write_json(
                spec,
                &ThresholdJson {
                    family,
                    size,
                    n_trials,
                    zeta_c_hat: summary.density.mean,
                    stderr: summary.density.stderr,
                    marginals: summary.height_marginals.to_vec(),
                    mean_topples: summary.mean_topples,
                },
            )?,
        }
    }
    Ok(0)
}

// --------------------------------------------------------------- stationary

#[derive(Serialize)]
struct EstimateJson {
    mean: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct StationaryJson<'a> {
    family: &'a str,
    vertices: usize,
    n_samples: usize,
    per_nonsink: EstimateJson,
    per_vertex: EstimateJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic: Option<f64>,
}

#[derive(Serialize)]
struct SiteJson<'a> {
    family: &'a str,
    vertices: usize,
    site: usize,
    n_samples: usize,
    mean: f64,
    stderr: f64,
    histogram: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic: Option<f64>,
}

/// Builds the sinked graph for a stationary or response run and a label
/// describing its parameters.
fn sinked_graph(spec: &ExperimentSpec) -> RunResult<(SinkedGraph, String)> {
    let family = family_of(spec)?;
    let g = match family {
        "cycle" => graph::cycle_with_sink(size_of(spec)?)?,
        "bracelet" => graph::bracelet_with_sink(size_of(spec)?)?,
        "complete" => graph::complete_with_sink(size_of(spec)?)?,
        "ladder" => graph::ladder_with_sinks(size_of(spec)?)?,
        "flower" => graph::flower_with_sink(size_of(spec)?)?,
        "lollipop" => graph::lollipop_with_sink(size_of(spec)?)?,
        "wired-tree" => {
            let q = spec.q.ok_or_else(|| invalid("wired-tree needs --q"))?;
            let depth = spec.depth.ok_or_else(|| invalid("wired-tree needs --depth"))?;
            graph::wired_tree(q, depth)?
        }
        other => {
            return Err(invalid(format!(
                "unknown sinked family: {other} \
                 (known: cycle, bracelet, complete, ladder, flower, lollipop, wired-tree)"
            )))
        }
    };
    let label = match family {
        "wired-tree" => format!(
            "family=wired-tree q={} depth={}",
            spec.q.unwrap(),
            spec.depth.unwrap()
        ),
        _ => format!("family={family} size={}", spec.size.unwrap_or(0)),
    };
    Ok((g, label))
}

/// Exact or limiting value the per-nonsink stationary density should
/// approach, when one is known.
fn stationary_reference(family: &str, g: &SinkedGraph) -> Option<(f64, &'static str)> {
    if g.num_vertices() <= 300 && g.sinks().len() == 1 {
        let (_, per_nonsink) = analytic::tutte_zeta_s(&g.graph, g.sinks()[0]).ok()?;
        return Some((per_nonsink.to_f64()?, "exact"));
    }
    match family {
        "bracelet" => Some((analytic::bracelet_zeta_s(g.num_vertices() as u64), "exact")),
        "cycle" => Some((1.0, "limit")),
        "flower" => Some((5.0 / 3.0, "limit")),
        "ladder" => Some((analytic::ladder_stationary().zeta_s, "limit")),
        "complete" => Some((
            reference::complete_zeta_s_leading(g.num_vertices() as u64 - 1),
            "reference",
        )),
        _ => None,
    }
}

fn run_stationary(spec: &ExperimentSpec) -> RunResult<i32> {
    let (g, label) = sinked_graph(spec)?;
    let family = family_of(spec)?;
    let n_samples = spec.n_trials.unwrap_or(100);
    let seed = spec.seed;
    let policy = mc::BurnInPolicy::for_graph(&g);

    if let Some(site) = spec.site {
        let s = mc::stationary_site_estimate(&g, site, n_samples, seed, &policy)?;
        let analytic_value = match family {
            "wired-tree" if site == 0 => {
                analytic::cayley_zeta_s(spec.q.unwrap() as u64)
                    .ok()
                    .and_then(|r| r.to_f64())
            }
            _ => None,
        };
        let mut line = format!(
            "stationary {label} samples={n_samples} seed={seed} site={site}: \
             height = {:.6} +- {:.6}",
            s.height.mean, s.height.stderr
        );
        if let Some(target) = analytic_value {
            line.push_str(&deviation_clause(s.height.mean, s.height.stderr, target, "exact"));
        }
        println!("{line}");

        if let Some(path) = &spec.output {
            match pick_format(spec) {
                OutputFormat::Csv => {
                    let mut text = artifact_header(spec);
                    text.push_str("height,count\n");
                    for (h, c) in s.histogram.iter().enumerate() {
                        let _ = writeln!(text, "{h},{c}");
                    }
                    write_text(path, &text)?;
                }
                OutputFormat::Json => write_json(
                    spec,
                    &SiteJson {
                        family,
                        vertices: g.num_vertices(),
                        site,
                        n_samples,
                        mean: s.height.mean,
                        stderr: s.height.stderr,
                        histogram: s.histogram.to_vec(),
                        analytic: analytic_value,
                    },
                )?,
            }
        }
        return Ok(0);
    }

    if n_samples < 2 {
        return Err(invalid("stationary density needs at least 2 samples"));
    }
    let totals: Vec<u64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i);
            mc::stationary_sample(&g, &mut rng, &policy).total()
        })
        .collect();
    let np = g.num_nonsink() as f64;
    let nv = g.num_vertices() as f64;
    let per_nonsink: Vec<f64> = totals.iter().map(|&t| t as f64 / np).collect();
    let per_vertex: Vec<f64> = totals.iter().map(|&t| t as f64 / nv).collect();
    let per_nonsink = mc::Estimate::from_values(&per_nonsink)?;
    let per_vertex = mc::Estimate::from_values(&per_vertex)?;

    let reference = stationary_reference(family, &g);
    let mut line = format!(
        "stationary {label} samples={n_samples} seed={seed}: \
         per_nonsink = {:.6} +- {:.6}",
        per_nonsink.mean, per_nonsink.stderr
    );
    if let Some((target, status)) = reference {
        line.push_str(&deviation_clause(per_nonsink.mean, per_nonsink.stderr, target, status));
    }
    let _ = write!(
        line,
        " | per_vertex = {:.6} +- {:.6}",
        per_vertex.mean, per_vertex.stderr
    );
    println!("{line}");

    if let Some(path) = &spec.output {
        match pick_format(spec) {
            OutputFormat::Csv => {
                let mut text = artifact_header(spec);
                text.push_str("sample,total,per_nonsink,per_vertex\n");
                for (i, &t) in totals.iter().enumerate() {
                    let _ = writeln!(text, "{i},{t},{},{}", t as f64 / np, t as f64 / nv);
                }
                write_text(path, &text)?;
            }
            OutputFormat::Json => write_json(
                spec,
                &StationaryJson {
                    family,
                    vertices: g.num_vertices(),
                    n_samples,
                    per_nonsink: EstimateJson {
                        mean: per_nonsink.mean,
                        stderr: per_nonsink.stderr,
                    },
                    per_vertex: EstimateJson {
                        mean: per_vertex.mean,
                        stderr: per_vertex.stderr,
                    },
                    analytic: reference.map(|(v, _)| v),
                },
            )?,
        }
    }
    Ok(0)
}

// --------------------------------------------------------- density response

#[derive(Serialize)]
struct ResponsePointJson {
    lambda: f64,
    mean: f64,
    stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dev_sigma: Option<f64>,
}

#[derive(Serialize)]
struct ResponseJson<'a> {
    family: &'a str,
    size: usize,
    n_trials: usize,
    seed: u64,
    points: Vec<ResponsePointJson>,
}

fn run_density_response(spec: &ExperimentSpec) -> RunResult<i32> {
    let family = family_of(spec)?;
    let grid = grid_of(spec)?;
    let trials = spec.n_trials.unwrap_or(10);
    let seed = spec.seed;

    let points = match family {
        "cycle" => mc::density_response_cycle(size_of(spec)?, grid, trials, seed)?,
        "bracelet" => mc::density_response_bracelet(size_of(spec)?, grid, trials, seed)?,
        _ => {
            let (g, _) = sinked_graph(spec)?;
            mc::density_response(&g, grid, trials, seed)?
        }
    };

    let law = analytic::density_laws()
        .into_iter()
        .find(|l| l.family == family);
    let mut json_points = Vec::with_capacity(points.len());
    for p in &points {
        let analytic_value = law.as_ref().map(|l| (l.rho)(p.lambda));
        let dev = analytic_value.map(|a| (p.density.mean - a) / p.density.stderr);
        let mut line = format!(
            "density-response family={family} lambda={}: density = {:.6} +- {:.6}",
            p.lambda, p.density.mean, p.density.stderr
        );
        if let Some(a) = analytic_value {
            line.push_str(&deviation_clause(p.density.mean, p.density.stderr, a, "analytic"));
        }
        println!("{line}");
        json_points.push(ResponsePointJson {
            lambda: p.lambda,
            mean: p.density.mean,
            stderr: p.density.stderr,
            analytic: analytic_value,
            dev_sigma: dev,
        });
    }

    if let Some(path) = &spec.output {
        match pick_format(spec) {
            OutputFormat::Csv => {
                let mut text = artifact_header(spec);
                text.push_str("lambda,mean,stderr,analytic,dev_sigma\n");
                for p in &json_points {
                    let _ = writeln!(
                        text,
                        "{},{},{},{},{}",
                        p.lambda,
                        p.mean,
                        p.stderr,
                        p.analytic.unwrap_or(f64::NAN),
                        p.dev_sigma.unwrap_or(f64::NAN)
                    );
                }
                write_text(path, &text)?;
            }
            OutputFormat::Json => write_json(
                spec,
                &ResponseJson {
                    family,
                    size: spec.size.unwrap_or(0),
                    n_trials: trials,
                    seed,
                    points: json_points,
                },
            )?,
        }
    }
    Ok(0)
}

// -------------------------------------------------------- activity response

#[derive(Serialize)]
struct ActivityCountJson {
    num: u64,
    den: u64,
    count: u64,
}

#[derive(Serialize)]
struct ActivityPointJson {
    lambda: f64,
    counts: Vec<ActivityCountJson>,
    budget_exhausted: u64,
    max_period: u64,
    max_transient: u64,
}

#[derive(Serialize)]
struct ActivityJson<'a> {
    family: &'a str,
    size: usize,
    n_trials: usize,
    seed: u64,
    max_steps: u64,
    points: Vec<ActivityPointJson>,
}

fn run_activity_response(spec: &ExperimentSpec) -> RunResult<i32> {
    let family = family_of(spec)?;
    let size = size_of(spec)?;
    let grid = grid_of(spec)?;
    let trials = spec.n_trials.unwrap_or(200);
    let seed = spec.seed;

    let (points, max_steps) = match family {
        "flower" => {
            let g = graph::flower(size)?;
            let steps = spec.max_steps.unwrap_or(mc::orbit_step_budget(g.num_vertices()));
            (mc::activity_response(&g, grid, trials, seed, steps)?, steps)
        }
        "cycle" => {
            let g = graph::cycle(size)?;
            let steps = spec.max_steps.unwrap_or(mc::orbit_step_budget(g.num_vertices()));
            (mc::activity_response(&g, grid, trials, seed, steps)?, steps)
        }
        "bracelet" => {
            let g = graph::bracelet(size)?;
            let steps = spec.max_steps.unwrap_or(mc::orbit_step_budget(g.num_vertices()));
            (mc::activity_response(&g, grid, trials, seed, steps)?, steps)
        }
        "complete" => {
            let g = graph::complete(size)?;
            let steps = spec.max_steps.unwrap_or(mc::orbit_step_budget(g.num_vertices()));
            (mc::activity_response(&g, grid, trials, seed, steps)?, steps)
        }
        "torus" => {
            let t = Torus::new(size)?;
            let steps = spec.max_steps.unwrap_or(mc::orbit_step_budget(t.num_vertices()));
            (mc::activity_response(&t, grid, trials, seed, steps)?, steps)
        }
        other => {
            return Err(invalid(format!(
                "unknown activity family: {other} \
                 (known: flower, cycle, bracelet, complete, torus)"
            )))
        }
    };

    let mut exhausted_total = 0u64;
    let mut json_points = Vec::with_capacity(points.len());
    for p in &points {
        exhausted_total += p.budget_exhausted;
        let modal = p
            .activity_counts
            .iter()
            .max_by_key(|(_, c)| *c)
            .map(|(a, c)| format!("{a} ({}/{} trials)", c, p.trials))
            .unwrap_or_else(|| "none".into());
        println!(
            "activity-response family={family} lambda={}: modal activity = {modal}, \
             max_period {}, max_transient {}, budget_exhausted {}",
            p.lambda, p.max_period, p.max_transient, p.budget_exhausted
        );
        json_points.push(ActivityPointJson {
            lambda: p.lambda,
            counts: p
                .activity_counts
                .iter()
                .map(|&(a, count)| ActivityCountJson {
                    num: *a.numer(),
                    den: *a.denom(),
                    count,
                })
                .collect(),
            budget_exhausted: p.budget_exhausted,
            max_period: p.max_period,
            max_transient: p.max_transient,
        });
    }

    if let Some(path) = &spec.output {
        match pick_format(spec) {
            OutputFormat::Csv => {
                let mut text = artifact_header(spec);
                text.push_str(
                    "lambda,activity_num,activity_den,activity,count,\
                     max_period,max_transient,budget_exhausted\n",
                );
                for p in &json_points {
                    for c in &p.counts {
                        let _ = writeln!(
                            text,
                            "{},{},{},{},{},{},{},{}",
                            p.lambda,
                            c.num,
                            c.den,
                            c.num as f64 / c.den as f64,
                            c.count,
                            p.max_period,
                            p.max_transient,
                            p.budget_exhausted
                        );
                    }
                }
                write_text(path, &text)?;
            }
            OutputFormat::Json => write_json(
                spec,
                &ActivityJson {
                    family,
                    size,
                    n_trials: trials,
                    seed,
                    max_steps,
                    points: json_points,
                },
            )?,
        }
    }
    if exhausted_total > 0 {
        eprintln!("warning: {exhausted_total} orbit searches exhausted the step budget");
        return Ok(2);
    }
    Ok(0)
}

// ----------------------------------------------------------------- analytic

#[derive(Serialize)]
struct ConstantJson {
    name: String,
    value: f64,
    status: &'static str,
}

fn analytic_table() -> Vec<ConstantJson> {
    let ladder = analytic::ladder_stationary();
    let mut rows = vec![
        ConstantJson {
            name: "cycle_zeta_c".into(),
            value: 1.0,
            status: "analytic",
        },
        ConstantJson {
            name: "bracelet_zeta_c".into(),
            value: analytic::bracelet_zeta_c(),
            status: "root",
        },
        ConstantJson {
            name: "bracelet_zeta_s_limit".into(),
            value: 2.5,
            status: "exact",
        },
        ConstantJson {
            name: "flower_zeta_c".into(),
            value: analytic::flower_zeta_c(),
            status: "root",
        },
        ConstantJson {
            name: "flower_zeta_c_prime".into(),
            value: analytic::flower_zeta_c_prime(),
            status: "root",
        },
        ConstantJson {
            name: "flower_zeta_s_limit".into(),
            value: 5.0 / 3.0,
            status: "exact",
        },
        ConstantJson {
            name: "ladder_perron".into(),
            value: ladder.perron_value,
            status: "exact",
        },
        ConstantJson {
            name: "ladder_zeta_s".into(),
            value: ladder.zeta_s,
            status: "exact",
        },
    ];
    for (h, p) in ladder.height_probs.iter().enumerate() {
        rows.push(ConstantJson {
            name: format!("ladder_h{h}"),
            value: *p,
            status: "exact",
        });
    }
    for q in [2u64, 3, 4] {
        rows.push(ConstantJson {
            name: format!("cayley_q{q}_zeta_s"),
            value: analytic::cayley_zeta_s(q)
                .expect("q >= 2")
                .to_f64()
                .expect("small rational"),
            status: "exact",
        });
    }
    rows.extend(reference::constants().into_iter().map(|c| ConstantJson {
        name: c.name.into(),
        value: c.value,
        status: c.status,
    }));
    rows
}

fn analytic_family_summary(spec: &ExperimentSpec) -> RunResult<String> {
    let family = family_of(spec)?;
    Ok(match family {
        "cycle" => "analytic family=cycle: zeta_s = 1 (limit), zeta_c = 1".into(),
        "bracelet" => format!(
            "analytic family=bracelet: zeta_s = 2.5 (finite n: 2.5 - 2/n), zeta_c = {:.6}",
            analytic::bracelet_zeta_c()
        ),
        "flower" => format!(
            "analytic family=flower: zeta_s = {:.6} (limit), zeta_c = {:.7}, \
             zeta_c_prime = {:.7}",
            5.0 / 3.0,
            analytic::flower_zeta_c(),
            analytic::flower_zeta_c_prime()
        ),
        "ladder" => {
            let l = analytic::ladder_stationary();
            format!(
                "analytic family=ladder: perron = {:.10}, zeta_s = {:.8}, \
                 heights (h0, h1, h2) = ({:.7}, {:.7}, {:.7})",
                l.perron_value,
                l.zeta_s,
                l.height_probs[0],
                l.height_probs[1],
                l.height_probs[2]
            )
        }
        "cayley" => {
            let q = spec.q.ok_or_else(|| invalid("cayley needs --q"))? as u64;
            let dist = analytic::cayley_height_dist(q)?;
            let heights: Vec<String> = dist.iter().map(|r| r.to_string()).collect();
            format!(
                "analytic family=cayley q={q}: heights ({}), zeta_s = {}",
                heights.join(", "),
                analytic::cayley_zeta_s(q)?
            )
        }
        "z2" => {
            let h = reference::z2_height_probs();
            format!(
                "analytic family=z2: zeta_s = 17/8 (conjectural), zeta_c = {:.6} (empirical), \
                 heights (h0..h3) = ({:.6}, {:.6}, {:.6}, {:.6})",
                reference_value("z2_zeta_c"),
                h[0],
                h[1],
                h[2],
                h[3]
            )
        }
        "complete" => {
            let n = size_of(spec)? as u64;
            format!(
                "analytic family=complete n={n}: zeta_s ~ n/2 + sqrt(pi/8) sqrt(n) = {:.4}, \
                 threshold lower bound n - 2 sqrt(n ln n) = {:.4}",
                reference::complete_zeta_s_leading(n),
                n as f64 - 2.0 * (n as f64 * (n as f64).ln()).sqrt()
            )
        }
        other => {
            return Err(invalid(format!(
                "unknown analytic family: {other} \
                 (known: cycle, bracelet, flower, ladder, cayley, z2, complete)"
            )))
        }
    })
}

fn run_analytic(spec: &ExperimentSpec) -> RunResult<i32> {
    if spec.table {
        let rows = analytic_table();
        match pick_format(spec) {
            OutputFormat::Csv => {
                let mut text = artifact_header(spec);
                text.push_str("name,value,status\n");
                for r in &rows {
                    let _ = writeln!(text, "{},{},{}", r.name, r.value, r.status);
                }
                match &spec.output {
                    Some(path) => write_text(path, &text)?,
                    None => print!("{text}"),
                }
            }
            OutputFormat::Json => {
                if spec.output.is_some() {
                    write_json(spec, &rows)?;
                } else {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&rows)
                            .map_err(|e| invalid(e.to_string()))?
                    );
                }
            }
        }
        return Ok(0);
    }
    println!("{}", analytic_family_summary(spec)?);
    Ok(0)
}

// ------------------------------------------------------------------- verify

#[derive(Serialize)]
struct CheckJson {
    suite: String,
    check: String,
    passed: bool,
    detail: String,
}

fn run_verify(spec: &ExperimentSpec) -> RunResult<i32> {
    let suite = spec.suite.as_deref().unwrap_or("all");
    let report = verify::run_suite(suite, spec.seed)?;
    for c in &report.checks {
        println!(
            "{}\t{}\t{}\t{}",
            if c.passed { "PASS" } else { "FAIL" },
            report.suite,
            c.name,
            c.detail
        );
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    println!(
        "verify suite={suite} seed={}: {passed}/{} checks passed",
        spec.seed,
        report.checks.len()
    );

    if let Some(path) = &spec.output {
        match pick_format(spec) {
            OutputFormat::Csv => {
                let mut text = artifact_header(spec);
                text.push_str("suite,check,status,detail\n");
                for c in &report.checks {
                    let _ = writeln!(
                        text,
                        "{},{},{},{}",
                        report.suite,
                        csv_field(&c.name),
                        if c.passed { "pass" } else { "fail" },
                        csv_field(&c.detail)
                    );
                }
                write_text(path, &text)?;
            }
            OutputFormat::Json => {
                let rows: Vec<CheckJson> = report
                    .checks
                    .iter()
                    .map(|c| CheckJson {
                        suite: report.suite.clone(),
                        check: c.name.clone(),
                        passed: c.passed,
                        detail: c.detail.clone(),
                    })
                    .collect();
                write_json(spec, &rows)?;
            }
        }
    }
    Ok(if report.all_passed() { 0 } else { 1 })
}
