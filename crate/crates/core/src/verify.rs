//! Executable self-check suites: cross-validations between independent
//! routes to the same quantity (burning vs. reachability, determinant
//! counts vs. enumeration, closed forms vs. simulation) plus the abelian
//! and conservation properties on randomized instances. The CLI exposes
//! these as `verify --suite <name>`; the heavy acceptance runs reuse them.

use num_rational::BigRational;

use crate::chipfiring;
use crate::counting;
use crate::dynamics::{self, Config};
use crate::graph::{self, MultiGraph, MultiGraphBuilder, SinkedGraph, Topology};
use crate::oracle;
use crate::rng::RngStream;
use crate::{analytic, Error, Result};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub const SUITES: [&str; 3] = ["small-oracles", "abelian", "staircase"];

/// Runs one named suite ("small-oracles", "abelian", "staircase") or
/// "all".
pub fn run_suite(name: &str, seed: u64) -> Result<CheckReport> {
    match name {
        "small-oracles" => Ok(small_oracles()),
        "abelian" => Ok(abelian(seed, 100)),
        "staircase" => Ok(staircase(seed, 120)),
        "all" => {
            let mut checks = small_oracles().checks;
            checks.extend(abelian(seed, 100).checks);
            checks.extend(staircase(seed, 120).checks);
            Ok(CheckReport {
                suite: "all".into(),
                checks,
            })
        }
        other => Err(Error::InvalidParameter(format!("unknown suite: {other}"))),
    }
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn small_instances() -> Vec<(&'static str, SinkedGraph)> {
    vec![
        ("sinked cycle Z4", graph::cycle_with_sink(4).unwrap()),
        ("sinked doubled cycle B4", graph::bracelet_with_sink(4).unwrap()),
        ("sinked complete K3", graph::complete_with_sink(3).unwrap()),
        ("2x3 ladder", graph::ladder_with_sinks(3).unwrap()),
    ]
}

/// Burning test against the chain-reachability closure, determinant
/// recurrent counts against enumeration, and the subgraph-count route to
/// the stationary density against the exact enumeration mean.
pub fn small_oracles() -> CheckReport {
    let mut checks = Vec::new();

    for (name, g) in small_instances() {
        let reachable = oracle::reachable_recurrent_set(&g);
        let enumerated = dynamics::enumerate_recurrent(&g).unwrap();
        let classified: Vec<Vec<u64>> = enumerated
            .iter()
            .map(|c| c.heights().to_vec())
            .collect();
        let same_set = reachable.len() == classified.len()
            && classified.iter().all(|c| reachable.contains(c));
        checks.push(check(
            format!("burning = reachability on {name}"),
            same_set,
            format!("{} burning-recurrent, {} reachable", classified.len(), reachable.len()),
        ));

        let det = counting::recurrent_count(&g).unwrap();
        let by_enum = enumerated.len();
        checks.push(check(
            format!("determinant count on {name}"),
            det == by_enum.into(),
            format!("determinant {det}, enumeration {by_enum}"),
        ));
    }

    let tutte_cases: Vec<(&str, MultiGraph, usize)> = vec![
        ("K3", graph::complete(3).unwrap(), 0),
        ("K4", graph::complete(4).unwrap(), 0),
        ("Z4", graph::cycle(4).unwrap(), 0),
        ("Z5", graph::cycle(5).unwrap(), 0),
    ];
    for (name, g, sink) in tutte_cases {
        let (_, per_nonsink) = analytic::tutte_zeta_s(&g, sink).unwrap();
        let sinked = SinkedGraph::new(g, vec![sink]).unwrap();
        let recurrent = dynamics::enumerate_recurrent(&sinked).unwrap();
        let total: u64 = recurrent.iter().map(|c| c.total()).sum();
        let mean = BigRational::new(
            total.into(),
            ((recurrent.len() * sinked.num_nonsink()) as u64).into(),
        );
        checks.push(check(
            format!("subgraph-count density on sinked {name}"),
            per_nonsink == mean,
            format!("counts give {per_nonsink}, enumeration gives {mean}"),
        ));
    }

    CheckReport {
        suite: "small-oracles".into(),
        checks,
    }
}

/// Uniform random connected multigraph on 2..=max_vertices vertices, with
/// occasional parallel edges and loops.
pub fn random_multigraph(rng: &mut RngStream, max_vertices: usize) -> MultiGraph {
    loop {
        let n = 2 + rng.uniform_below(max_vertices as u64 - 1) as usize;
        let mut b = MultiGraphBuilder::new(n);
        // Random spanning tree first so connectivity is guaranteed.
        for v in 1..n {
            let w = rng.uniform_below(v as u64) as usize;
            b.add_edge(v, w, 1 + rng.uniform_below(2)).unwrap();
        }
        let extras = rng.uniform_below(2 * n as u64);
        for _ in 0..extras {
            let v = rng.uniform_below(n as u64) as usize;
            let w = rng.uniform_below(n as u64) as usize;
            if v == w {
                b.add_loop(v, 1 + rng.uniform_below(2)).unwrap();
            } else {
                b.add_edge(v, w, 1 + rng.uniform_below(2)).unwrap();
            }
        }
        let g = b.build();
        if g.is_connected() {
            return g;
        }
    }
}

fn random_config(rng: &mut RngStream, g: &MultiGraph, cap_factor: u64) -> Config {
    let heights: Vec<u64> = (0..g.num_vertices())
        .map(|v| rng.uniform_below(cap_factor * g.degree(v) + 1))
        .collect();
    Config::new(heights)
}

/// Per-vertex accounting: final = initial + inflow - outflow, where the
/// flows are determined by the odometer and the arc structure.
fn accounting_holds(g: &MultiGraph, before: &Config, after: &Config, od: &[u64]) -> bool {
    let n = g.num_vertices();
    let mut inflow = vec![0u64; n];
    for v in 0..n {
        g.for_each_arc(v, |w| inflow[w] += od[v]);
    }
    (0..n).all(|v| {
        before.get(v) + inflow[v] == after.get(v) + od[v] * g.degree(v)
    })
}

/// Stabilization order independence, the accounting identity, and mirror
/// commutation with the synchronous step, on random instances.
pub fn abelian(seed: u64, instances: usize) -> CheckReport {
    let mut rng = RngStream::new(seed, 0);
    let mut order_failures = 0usize;
    let mut accounting_failures = 0usize;
    let mut mirror_failures = 0usize;
    let mut mirror_checked = 0usize;

    for _ in 0..instances {
        let g = random_multigraph(&mut rng, 12);
        let n = g.num_vertices();
        let sink = rng.uniform_below(n as u64) as usize;
        let sinked = SinkedGraph::new(g.clone(), vec![sink]).unwrap();
        let c = random_config(&mut rng, &g, 2);

        let (fast_c, fast_od) = dynamics::stabilize(&sinked, &c).unwrap();
        let mask = Some(sinked.sink_mask());
        let naive = oracle::naive_stabilize(&g, mask, &c);
        let random_order = oracle::random_order_stabilize(&g, mask, &c, &mut rng);
        let greedy = oracle::greedy_max_stabilize(&g, mask, &c);
        for (other_c, other_od) in [&naive, &random_order, &greedy] {
            if other_c != &fast_c || other_od.as_slice() != fast_od.topples() {
                order_failures += 1;
            }
        }

        if !accounting_holds(&g, &c, &fast_c, fast_od.topples()) {
            accounting_failures += 1;
        }

        // Mirror commutation needs heights within 0..=2d-1.
        let capped: Vec<u64> = (0..n)
            .map(|v| c.get(v).min(2 * g.degree(v) - 1))
            .collect();
        let capped = Config::new(capped);
        let step_then_mirror =
            chipfiring::mirror(&g, &chipfiring::parallel_step(&g, &capped).unwrap());
        let mirror_then_step =
            chipfiring::parallel_step(&g, &chipfiring::mirror(&g, &capped).unwrap());
        if let (Ok(a), Ok(b)) = (step_then_mirror, mirror_then_step) {
            mirror_checked += 1;
            if a != b {
                mirror_failures += 1;
            }
        }
    }

    let checks = vec![
        check(
            "stabilization is order independent",
            order_failures == 0,
            format!("{order_failures} mismatches over {instances} instances x 3 orders"),
        ),
        check(
            "per-vertex accounting identity",
            accounting_failures == 0,
            format!("{accounting_failures} violations over {instances} instances"),
        ),
        check(
            "mirror commutes with the synchronous step",
            mirror_failures == 0 && mirror_checked > 0,
            format!("{mirror_failures} violations over {mirror_checked} in-range instances"),
        ),
    ];
    CheckReport {
        suite: "abelian".into(),
        checks,
    }
}

/// Orbit activity against the interval classification on random flowers,
/// plus the period bound and the activity quantization.
pub fn staircase(seed: u64, instances: usize) -> CheckReport {
    let mut rng = RngStream::new(seed, 1);
    let mut rz_mismatches = 0usize;
    let mut period_violations = 0usize;
    let mut quantization_violations = 0usize;

    for _ in 0..instances {
        let n = 3 + rng.uniform_below(5) as usize;
        let g = graph::flower(n).unwrap();
        let c = random_config(&mut rng, &g, 2);
        let orbit = chipfiring::find_orbit(&g, &c, 1 << 20).unwrap();
        let r = c.total();
        let (z, _) = chipfiring::petal_invariant(&g, &c).unwrap();
        let predicted = chipfiring::flower_activity_from_rz(n as u64, r, z).unwrap();
        if orbit.activity != predicted {
            rz_mismatches += 1;
        }
        if orbit.period > 3 {
            period_violations += 1;
        }
        let a = orbit.activity;
        let quantized = [(0u64, 1u64), (1, 3), (1, 2), (2, 3), (1, 1)]
            .iter()
            .any(|&(p, q)| a == num_rational::Ratio::new(p, q));
        if !quantized {
            quantization_violations += 1;
        }
    }

    let checks = vec![
        check(
            "flower activity matches the load/invariant classification",
            rz_mismatches == 0,
            format!("{rz_mismatches} mismatches over {instances} random flowers"),
        ),
        check(
            "flower periods stay at 3 or less",
            period_violations == 0,
            format!("{period_violations} violations"),
        ),
        check(
            "flower activity is quantized",
            quantization_violations == 0,
            format!("{quantization_violations} off-lattice activities"),
        ),
    ];
    CheckReport {
        suite: "staircase".into(),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let report = run_suite("all", 2024).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(report.checks.len() >= 14);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", 0).is_err());
    }

    #[test]
    fn random_multigraphs_are_connected_and_small() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..50 {
            let g = random_multigraph(&mut rng, 12);
            assert!(g.is_connected());
            assert!(g.num_vertices() >= 2 && g.num_vertices() <= 12);
        }
    }

    #[test]
    fn accounting_detects_a_corrupted_odometer() {
        let g = graph::cycle(4).unwrap();
        let sinked = graph::cycle_with_sink(4).unwrap();
        let c = Config::new(vec![0, 2, 1, 0]);
        let (after, od) = dynamics::stabilize(&sinked, &c).unwrap();
        assert!(accounting_holds(&g, &c, &after, od.topples()));
        let mut bad = od.topples().to_vec();
        bad[1] += 1;
        assert!(!accounting_holds(&g, &c, &after, &bad));
    }
}
