//! Acceptance gate: one test per release criterion, each printing a
//! single PASS line with the measured numbers. The whole file takes
//! roughly 25 minutes on one core in the optimized test profile; run it
//! with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use rayon::prelude::*;

use sandpile_core::analytic;
use sandpile_core::graph::{self, Torus};
use sandpile_core::montecarlo as mc;
use sandpile_core::rng::RngStream;
use sandpile_core::verify;

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[test]
fn criterion_1_closed_form_constants() {
    let start = Instant::now();

    let b = analytic::bracelet_zeta_c();
    assert!(
        (b - 2.496608).abs() <= 1e-6,
        "criterion 1: FAIL - bracelet threshold root {b}"
    );
    let f = analytic::flower_zeta_c();
    assert!(
        (f - 1.6688976).abs() <= 1e-6,
        "criterion 1: FAIL - flower threshold root {f}"
    );
    let fp = analytic::flower_zeta_c_prime();
    assert!(
        (fp - 3.3333182).abs() <= 1e-6,
        "criterion 1: FAIL - flower upper root {fp}"
    );

    let ladder = analytic::ladder_stationary();
    let perron = 2.0 + 3f64.sqrt();
    assert!(
        (ladder.perron_value - perron).abs() <= 1e-10,
        "criterion 1: FAIL - ladder growth rate {}",
        ladder.perron_value
    );
    assert!(
        (ladder.zeta_s - 1.60566243).abs() <= 1e-8,
        "criterion 1: FAIL - ladder density {}",
        ladder.zeta_s
    );
    for (got, want) in ladder.height_probs.iter().zip([0.0773503, 0.2396370, 0.6830127]) {
        assert!(
            (got - want).abs() <= 1e-7,
            "criterion 1: FAIL - ladder marginal {got} vs {want}"
        );
    }

    let tables: [(u64, Vec<BigRational>); 3] = [
        (2, vec![rational(1, 12), rational(4, 12), rational(7, 12)]),
        (
            3,
            vec![rational(2, 27), rational(2, 9), rational(1, 3), rational(10, 27)],
        ),
        (
            4,
            vec![
                rational(81, 1280),
                rational(27, 160),
                rational(153, 640),
                rational(21, 80),
                rational(341, 1280),
            ],
        ),
    ];
    for (q, want) in tables {
        let got = analytic::cayley_height_dist(q).unwrap();
        assert_eq!(got, want, "criterion 1: FAIL - tree height table q={q}");
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 1.0, "criterion 1: FAIL - took {dt:.3} s");
    println!(
        "criterion 1: PASS - roots {b:.7}/{f:.7}/{fp:.7}, ladder {:.10}/{:.8}, \
         tree tables exact, {dt:.3} s",
        ladder.perron_value, ladder.zeta_s
    );
}

#[test]
fn criterion_2_torus_threshold_scaling() {
    let t64 = Torus::new(64).unwrap();
    let s64 = mc::threshold_estimate(&t64, 100_000, 1).unwrap();
    let dev = s64.density.mean - 2.124956;
    assert!(
        dev.abs() <= 3.0 * s64.density.stderr,
        "criterion 2: FAIL - side 64 mean {:.6} is {:.2} stderr from 2.124956",
        s64.density.mean,
        dev / s64.density.stderr
    );
    assert!(
        dev.abs() < 0.0005,
        "criterion 2: FAIL - side 64 deviation {dev:.6}"
    );
    for (i, want) in [0.0736, 0.1740, 0.3064, 0.4460].iter().enumerate() {
        let got = s64.height_marginals[i];
        assert!(
            (got - want).abs() <= 0.001,
            "criterion 2: FAIL - height {i} marginal {got:.4} vs {want:.4}"
        );
    }

    let t256 = Torus::new(256).unwrap();
    let s256 = mc::threshold_estimate(&t256, 1000, 1).unwrap();
    let growth = s256.density.mean - s64.density.mean;
    let sigma = (s64.density.stderr.powi(2) + s256.density.stderr.powi(2)).sqrt();
    assert!(
        growth > 0.0,
        "criterion 2: FAIL - estimate fell from {:.6} to {:.6}",
        s64.density.mean,
        s256.density.mean
    );
    let expected_growth = 2.125257 - 2.124956;
    assert!(
        (growth - expected_growth).abs() <= 3.0 * sigma,
        "criterion 2: FAIL - growth {growth:.6} vs {expected_growth:.6} +- {sigma:.6}"
    );
    println!(
        "criterion 2: PASS - side 64: {:.6} +- {:.6} ({:+.2} sigma vs 2.124956), \
         marginals within 0.001, growth to side 256 {growth:+.6} (expected {expected_growth:+.6})",
        s64.density.mean,
        s64.density.stderr,
        dev / s64.density.stderr
    );
}

#[test]
fn criterion_3_doubled_cycle_transition() {
    let grid = [1.0, 2.0, 2.8, 3.5];
    let pts = mc::density_response_bracelet(100_000, &grid, 30, 1).unwrap();
    let mut worst: f64 = 0.0;
    for p in &pts {
        let law = analytic::bracelet_rho(p.lambda).unwrap();
        let dev = (p.density.mean - law).abs();
        worst = worst.max(dev);
        assert!(
            dev <= 0.01,
            "criterion 3: FAIL - response at lambda={} is {:.4} vs law {:.4}",
            p.lambda,
            p.density.mean,
            law
        );
    }
    let s = mc::threshold_estimate_bracelet(100_000, 200, 1).unwrap();
    let tdev = (s.density.mean - 2.496608).abs();
    assert!(
        tdev <= 0.01,
        "criterion 3: FAIL - threshold estimate {:.6}",
        s.density.mean
    );
    println!(
        "criterion 3: PASS - response worst |dev| {worst:.4} over {:?}, \
         threshold {:.6} (|dev| {tdev:.6})",
        grid, s.density.mean
    );
}

#[test]
fn criterion_4_flower_staircase() {
    let g = graph::flower(10_000).unwrap();
    let budget = mc::orbit_step_budget(g.num_vertices());
    let grid = [1.0, 1.9, 2.5, 3.1, 4.0];
    let pts = mc::activity_response(&g, &grid, 200, 1, budget).unwrap();
    let targets = [(0u64, 1u64), (1, 3), (1, 2), (2, 3), (1, 1)];
    let mut worst_frac = 1.0f64;
    for (p, (num, den)) in pts.iter().zip(targets) {
        assert_eq!(
            p.budget_exhausted, 0,
            "criterion 4: FAIL - orbit budget exhausted at lambda={}",
            p.lambda
        );
        assert!(
            p.max_period <= 3,
            "criterion 4: FAIL - period {} at lambda={}",
            p.max_period,
            p.lambda
        );
        let want = Ratio::new(num, den);
        let hits = p
            .activity_counts
            .iter()
            .find(|(a, _)| *a == want)
            .map_or(0, |&(_, c)| c);
        let frac = hits as f64 / p.trials as f64;
        worst_frac = worst_frac.min(frac);
        assert!(
            frac >= 0.99,
            "criterion 4: FAIL - activity {num}/{den} in {hits}/{} trials at lambda={}",
            p.trials,
            p.lambda
        );
    }

    let sinked = graph::flower_with_sink(10_000).unwrap();
    let r = mc::density_response(&sinked, &[2.0], 10, 1).unwrap();
    let law = 5.0 / 3.0 + (-6.0f64).exp() / 3.0;
    let dev = (r[0].density.mean - law).abs();
    assert!(
        dev <= 0.01,
        "criterion 4: FAIL - density {:.5} vs {law:.5} at lambda=2",
        r[0].density.mean
    );
    println!(
        "criterion 4: PASS - staircase levels hit in >= {:.1}% of 200 trials each, \
         periods <= 3, density at lambda=2 within {dev:.5}",
        100.0 * worst_frac
    );
}

#[test]
fn criterion_5_counting_oracles() {
    let report = verify::small_oracles();
    for c in &report.checks {
        assert!(c.passed, "criterion 5: FAIL - {}: {}", c.name, c.detail);
    }
    println!(
        "criterion 5: PASS - {} recurrence/counting cross-checks exact",
        report.checks.len()
    );
}

#[test]
fn criterion_6_order_independence_and_conservation() {
    let report = verify::abelian(2026, 1000);
    for c in &report.checks {
        assert!(c.passed, "criterion 6: FAIL - {}: {}", c.name, c.detail);
    }
    println!(
        "criterion 6: PASS - 1000 random instances: 3 toppling orders agree, \
         accounting exact, mirror commutes"
    );
}

#[test]
fn criterion_7_chain_laws() {
    let pts = mc::density_response_cycle(100_000, &[0.5, 1.5], 50, 1).unwrap();
    let devs: Vec<f64> = pts
        .iter()
        .map(|p| (p.density.mean - p.lambda.min(1.0)).abs())
        .collect();
    for (p, dev) in pts.iter().zip(&devs) {
        assert!(
            *dev <= 0.01,
            "criterion 7: FAIL - cycle response {:.4} at lambda={}",
            p.density.mean,
            p.lambda
        );
    }
    for seed in 0..100u64 {
        let r = mc::threshold_trial_cycle(4, &mut RngStream::new(seed, 0)).unwrap();
        assert!(
            r.m == 3 || r.m == 4,
            "criterion 7: FAIL - 4-cycle threshold m={} for seed {seed}",
            r.m
        );
    }
    println!(
        "criterion 7: PASS - chain response devs {:.5}/{:.5}, 4-cycle m in {{3,4}} \
         for 100 seeds",
        devs[0], devs[1]
    );
}

#[test]
fn criterion_8_regular_graphs_and_trees() {
    let s4 = mc::threshold_estimate_random_regular(3, 1 << 20, 1000, 1).unwrap();
    assert!(
        (2.0005..=2.0020).contains(&s4.density.mean),
        "criterion 8: FAIL - 4-regular mean {:.6} outside [2.0005, 2.0020]",
        s4.density.mean
    );
    let s5 = mc::threshold_estimate_random_regular(4, 1 << 20, 1000, 1).unwrap();
    assert!(
        (2.508..=2.516).contains(&s5.density.mean),
        "criterion 8: FAIL - 5-regular mean {:.6} outside [2.508, 2.516]",
        s5.density.mean
    );

    let mut tree_devs = Vec::new();
    for (q, depth) in [(2usize, 10usize), (3, 8), (4, 6)] {
        let g = graph::wired_tree(q, depth).unwrap();
        let policy = mc::BurnInPolicy::for_graph(&g);
        let s = mc::stationary_site_estimate(&g, 0, 500, 1, &policy).unwrap();
        let target = (q as f64 + 1.0) / 2.0;
        let sigmas = (s.height.mean - target) / s.height.stderr;
        assert!(
            sigmas.abs() <= 3.0,
            "criterion 8: FAIL - wired tree q={q} root height {:.4} is {sigmas:.2} \
             stderr from {target}",
            s.height.mean
        );
        tree_devs.push(sigmas);
    }
    println!(
        "criterion 8: PASS - 4-regular {:.6}, 5-regular {:.6}, wired-tree root devs \
         {:+.2}/{:+.2}/{:+.2} sigma",
        s4.density.mean, s5.density.mean, tree_devs[0], tree_devs[1], tree_devs[2]
    );
}

#[test]
fn criterion_9_complete_graph_lower_bound() {
    let mut freqs = Vec::new();
    for n in [256usize, 1024] {
        let trials = 10 * n;
        let rows: Vec<mc::TrialResult> = (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                mc::threshold_trial_complete(n, &mut RngStream::new(1, i))
                    .expect("n >= 2")
            })
            .collect();
        let nf = n as f64;
        let bound = nf - 2.0 * (nf * nf.ln()).sqrt();
        let hits = rows
            .iter()
            .filter(|r| r.m as f64 / r.n_sites as f64 >= bound)
            .count();
        let freq = hits as f64 / trials as f64;
        assert!(
            freq >= 1.0 - 1.0 / nf,
            "criterion 9: FAIL - n={n}: freq {freq:.5} below {:.5}",
            1.0 - 1.0 / nf
        );
        freqs.push(freq);
    }
    println!(
        "criterion 9: PASS - threshold density cleared n - 2 sqrt(n ln n) with \
         freq {:.5} (n=256, 2560 trials) and {:.5} (n=1024, 10240 trials)",
        freqs[0], freqs[1]
    );
}
