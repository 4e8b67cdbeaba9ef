//! Seeded stochastic experiments: threshold-density trials, driven
//! stationary sampling, density response to Poisson initial conditions,
//! and activity scans of the synchronous dynamics.
//!
//! Every experiment draws from keyed counter streams, one substream per
//! trial, so results are bit-identical for a given seed regardless of how
//! many worker threads execute the trials. Aggregation always happens in
//! trial order over a collected vector.
//!
//! The threshold protocol adds particles at uniformly random sites until
//! an addition fails to stabilize, detected by every site toppling in one
//! avalanche. Detection clobbers the heights mid-avalanche, so trials keep
//! a periodic snapshot (heights, stream state, counters) and replay the
//! stabilizing prefix after an abort to recover the last stable
//! configuration. Cycles, doubled cycles, and complete graphs have
//! interval- and bucket-based fast paths that consume the random stream
//! identically to the generic engine and produce identical trial records.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::chain::{CyclePile, DoubledCyclePile, DoubledPathPile, PathPile};
use crate::chipfiring::find_orbit;
use crate::dynamics::{
    is_recurrent, run_detect, run_sinked, seed_all_unstable, Config, Workspace,
};
use crate::graph::{SinkedGraph, Topology};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Exact Poisson draw with parameter validation.
pub fn poisson_sample(lambda: f64, rng: &mut RngStream) -> Result<u64> {
    check_lambda(lambda)?;
    Ok(rng.poisson(lambda))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    for &l in grid {
        check_lambda(l)?;
    }
    Ok(())
}

/// Outcome of one threshold trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialResult {
    /// Number of particles added before the first non-stabilizing addition.
    pub m: u64,
    pub n_sites: u64,
    /// m / n_sites.
    pub density: Ratio<u64>,
    /// Site counts by height 0..=7 from the last stable configuration,
    /// with heights >= 8 pooled in the final bucket.
    pub height_histogram: [u64; 9],
    /// Topplings spent stabilizing the first m particles; the aborted
    /// avalanche is excluded.
    pub total_topples: u64,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_trials: usize,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Result<Estimate> {
        if values.len() < 2 {
            return Err(Error::TooFewTrials);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        Ok(Estimate {
            mean,
            stderr: (var / n).sqrt(),
            n_trials: values.len(),
        })
    }
}

/// Aggregated threshold trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSummary {
    pub density: Estimate,
    /// Mean fraction of sites at each height (buckets as in
    /// [`TrialResult::height_histogram`]); sums to 1.
    pub height_marginals: [f64; 9],
    pub mean_topples: f64,
}

pub fn build_histogram(heights: &[u64]) -> [u64; 9] {
    let mut hist = [0u64; 9];
    for &h in heights {
        hist[(h.min(8)) as usize] += 1;
    }
    hist
}

fn finish_trial(m: u64, heights: &[u64], total_topples: u64) -> TrialResult {
    TrialResult {
        m,
        n_sites: heights.len() as u64,
        density: Ratio::new(m, heights.len() as u64),
        height_histogram: build_histogram(heights),
        total_topples,
    }
}

fn snapshot_interval(n: usize) -> u64 {
    (n as u64 / 4).max(4096)
}

/// One threshold trial on any sinkless topology: particles are added at
/// uniform sites until the first addition whose avalanche topples every
/// site, which certifies non-stabilization. Returns the statistics of the
/// stable configuration just before that addition.
pub fn threshold_trial<T: Topology>(top: &T, rng: &mut RngStream) -> TrialResult {
    let n = top.num_vertices();
    let nv = n as u64;
    let every = snapshot_interval(n);
    let mut heights = vec![0u64; n];
    let mut stamps = vec![0u32; n];
    let mut ws = Workspace::for_vertices(n);
    let mut topples = 0u64;
    let mut additions = 0u64;
    let mut epoch = 0u32;

    let mut snap_heights = heights.clone();
    let mut snap_rng = rng.clone();
    let mut snap_topples = 0u64;
    let mut snap_additions = 0u64;

    loop {
        if additions.is_multiple_of(every) {
            snap_heights.clone_from(&heights);
            snap_rng = rng.clone();
            snap_topples = topples;
            snap_additions = additions;
        }
        let v = rng.uniform_below(nv) as usize;
        heights[v] += 1;
        epoch += 1;
        if heights[v] >= top.degree(v) {
            ws.in_queue[v] = true;
            ws.queue.push_back(v as u32);
            match run_detect(top, &mut heights, None, &mut stamps, epoch, &mut ws) {
                Some(t) => topples += t,
                None => {
                    ws.reset();
                    heights.clone_from(&snap_heights);
                    *rng = snap_rng.clone();
                    topples = snap_topples;
                    for _ in snap_additions..additions {
                        let v = rng.uniform_below(nv) as usize;
                        heights[v] += 1;
                        epoch += 1;
                        if heights[v] >= top.degree(v) {
                            ws.in_queue[v] = true;
                            ws.queue.push_back(v as u32);
                            let t =
                                run_detect(top, &mut heights, None, &mut stamps, epoch, &mut ws)
                                    .expect("replayed addition stabilized the first time");
                            topples += t;
                        }
                    }
                    break;
                }
            }
        }
        additions += 1;
    }
    finish_trial(additions, &heights, topples)
}

/// Threshold trial on the plain cycle via the interval representation.
/// Consumes the random stream exactly like [`threshold_trial`] on the same
/// graph and returns an identical record.
pub fn threshold_trial_cycle(n: usize, rng: &mut RngStream) -> Result<TrialResult> {
    if n < 3 {
        return Err(Error::InvalidParameter("cycle fast path needs n >= 3".into()));
    }
    Ok(cycle_trial(n, rng))
}

fn cycle_trial(n: usize, rng: &mut RngStream) -> TrialResult {
    let mut pile = CyclePile::empty(n);
    let mut topples = 0u64;
    let mut m = 0u64;
    loop {
        let v = rng.uniform_below(n as u64);
        match pile.add(v) {
            Some(t) => {
                topples += t;
                m += 1;
            }
            None => break,
        }
    }
    finish_trial(m, &pile.heights(), topples)
}

/// Threshold trial on the doubled cycle via pair-and-parity dynamics.
pub fn threshold_trial_bracelet(n: usize, rng: &mut RngStream) -> Result<TrialResult> {
    if n < 3 {
        return Err(Error::InvalidParameter(
            "bracelet fast path needs n >= 3".into(),
        ));
    }
    Ok(bracelet_trial(n, rng))
}

fn bracelet_trial(n: usize, rng: &mut RngStream) -> TrialResult {
    let mut pile = DoubledCyclePile::empty(n);
    let mut topples = 0u64;
    let mut m = 0u64;
    loop {
        let v = rng.uniform_below(n as u64);
        match pile.add(v) {
            Some(t) => {
                topples += t;
                m += 1;
            }
            None => break,
        }
    }
    finish_trial(m, &pile.heights(), topples)
}

/// Complete-graph trial state. Toppling on K_n subtracts n - 1 from one
/// site and adds 1 everywhere else, which is a global shift: with
/// h(v) = ell[v] + g, a topple is ell[v] -= n, g += 1. Sites stay put in
/// level buckets keyed by ell while stable; an avalanche pops unstable
/// sites from a stack and drains the bucket levels that the falling
/// instability threshold (n - 1 - g) crosses. Stable levels span less than
/// n values, so a ring of 2n buckets never aliases.
struct CompleteState {
    n: usize,
    width: i64,
    g: u64,
    ell: Vec<i64>,
    buckets: Vec<Vec<u32>>,
    slot: Vec<u32>,
    stack: Vec<u32>,
    stamps: Vec<u32>,
}

impl CompleteState {
    fn from_heights(heights: &[u64]) -> CompleteState {
        let n = heights.len();
        let width = 2 * n as i64;
        let mut state = CompleteState {
            n,
            width,
            g: 0,
            ell: heights.iter().map(|&h| h as i64).collect(),
            buckets: vec![Vec::new(); 2 * n],
            slot: vec![0; n],
            stack: Vec::new(),
            stamps: vec![0; n],
        };
        for v in 0..n {
            state.place(v);
        }
        state
    }

    fn threshold(&self) -> i64 {
        self.n as i64 - 1 - self.g as i64
    }

    fn bucket_index(&self, level: i64) -> usize {
        level.rem_euclid(self.width) as usize
    }

    fn place(&mut self, v: usize) {
        if self.ell[v] >= self.threshold() {
            self.stack.push(v as u32);
        } else {
            let idx = self.bucket_index(self.ell[v]);
            self.slot[v] = self.buckets[idx].len() as u32;
            self.buckets[idx].push(v as u32);
        }
    }

    fn remove_stable(&mut self, v: usize) {
        let idx = self.bucket_index(self.ell[v]);
        let pos = self.slot[v] as usize;
        let last = self.buckets[idx].pop().expect("site is bucketed");
        if last as usize != v {
            self.buckets[idx][pos] = last;
            self.slot[last as usize] = pos as u32;
        }
    }

    fn add_grain(&mut self, v: usize) {
        self.remove_stable(v);
        self.ell[v] += 1;
        self.place(v);
    }

    /// Runs the pending avalanche. Returns the topple count, or None the
    /// moment all n sites have toppled (heights are then mid-avalanche).
    fn avalanche(&mut self, epoch: u32) -> Option<u64> {
        let n = self.n;
        let d = (n - 1) as u64;
        let mut distinct = 0usize;
        let mut topples = 0u64;
        while let Some(v) = self.stack.pop() {
            let v = v as usize;
            let h = (self.ell[v] + self.g as i64) as u64;
            // Cap the batch so drained levels stay within the ring.
            let t = (h / d).min(n as u64);
            debug_assert!(t >= 1);
            if self.stamps[v] != epoch {
                self.stamps[v] = epoch;
                distinct += 1;
                if distinct == n {
                    return None;
                }
            }
            let tau_old = self.threshold();
            self.ell[v] -= t as i64 * n as i64;
            self.g += t;
            topples += t;
            let tau_new = self.threshold();
            for level in tau_new..tau_old {
                let idx = self.bucket_index(level);
                while let Some(w) = self.buckets[idx].pop() {
                    self.stack.push(w);
                }
            }
            self.place(v);
        }
        Some(topples)
    }

    fn write_heights(&self, out: &mut [u64]) {
        for v in 0..self.n {
            out[v] = (self.ell[v] + self.g as i64) as u64;
        }
    }
}

/// Threshold trial on the complete graph in amortized constant time per
/// addition and per topple.
pub fn threshold_trial_complete(n: usize, rng: &mut RngStream) -> Result<TrialResult> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "complete graph needs >= 2 vertices".into(),
        ));
    }
    Ok(complete_trial(n, rng))
}

fn complete_trial(n: usize, rng: &mut RngStream) -> TrialResult {
    let nv = n as u64;
    let every = snapshot_interval(n);
    let zeros = vec![0u64; n];
    let mut state = CompleteState::from_heights(&zeros);
    let mut topples = 0u64;
    let mut additions = 0u64;
    let mut epoch = 0u32;

    let mut snap_heights = zeros;
    let mut snap_rng = rng.clone();
    let mut snap_topples = 0u64;
    let mut snap_additions = 0u64;

    loop {
        if additions.is_multiple_of(every) {
            state.write_heights(&mut snap_heights);
            snap_rng = rng.clone();
            snap_topples = topples;
            snap_additions = additions;
        }
        let v = rng.uniform_below(nv) as usize;
        epoch += 1;
        state.add_grain(v);
        if !state.stack.is_empty() {
            match state.avalanche(epoch) {
                Some(t) => topples += t,
                None => {
                    state = CompleteState::from_heights(&snap_heights);
                    *rng = snap_rng.clone();
                    topples = snap_topples;
                    for _ in snap_additions..additions {
                        let v = rng.uniform_below(nv) as usize;
                        epoch += 1;
                        state.add_grain(v);
                        if !state.stack.is_empty() {
                            let t = state
                                .avalanche(epoch)
                                .expect("replayed addition stabilized the first time");
                            topples += t;
                        }
                    }
                    break;
                }
            }
        }
        additions += 1;
    }
    let mut heights = vec![0u64; n];
    state.write_heights(&mut heights);
    finish_trial(additions, &heights, topples)
}

fn trials_from<F>(n_trials: usize, seed: u64, trial: F) -> Vec<TrialResult>
where
    F: Fn(&mut RngStream) -> TrialResult + Sync,
{
    (0..n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i);
            trial(&mut rng)
        })
        .collect()
}

pub fn summarize_trials(results: &[TrialResult]) -> Result<ThresholdSummary> {
    if results.len() < 2 {
        return Err(Error::TooFewTrials);
    }
    let densities: Vec<f64> = results
        .iter()
        .map(|r| r.m as f64 / r.n_sites as f64)
        .collect();
    let density = Estimate::from_values(&densities)?;
    let mut height_marginals = [0f64; 9];
    let mut topples_sum = 0f64;
    for r in results {
        for (k, &c) in r.height_histogram.iter().enumerate() {
            height_marginals[k] += c as f64 / r.n_sites as f64;
        }
        topples_sum += r.total_topples as f64;
    }
    for m in &mut height_marginals {
        *m /= results.len() as f64;
    }
    Ok(ThresholdSummary {
        density,
        height_marginals,
        mean_topples: topples_sum / results.len() as f64,
    })
}

/// Independent threshold trials; trial i draws from substream i of `seed`.
pub fn threshold_trials<T: Topology + Sync>(
    top: &T,
    n_trials: usize,
    seed: u64,
) -> Vec<TrialResult> {
    trials_from(n_trials, seed, |rng| threshold_trial(top, rng))
}

pub fn threshold_estimate<T: Topology + Sync>(
    top: &T,
    n_trials: usize,
    seed: u64,
) -> Result<ThresholdSummary> {
    summarize_trials(&threshold_trials(top, n_trials, seed))
}

pub fn threshold_estimate_cycle(n: usize, n_trials: usize, seed: u64) -> Result<ThresholdSummary> {
    if n < 3 {
        return Err(Error::InvalidParameter("cycle fast path needs n >= 3".into()));
    }
    summarize_trials(&trials_from(n_trials, seed, |rng| cycle_trial(n, rng)))
}

pub fn threshold_estimate_bracelet(
    n: usize,
    n_trials: usize,
    seed: u64,
) -> Result<ThresholdSummary> {
    if n < 3 {
        return Err(Error::InvalidParameter(
            "bracelet fast path needs n >= 3".into(),
        ));
    }
    summarize_trials(&trials_from(n_trials, seed, |rng| bracelet_trial(n, rng)))
}

pub fn threshold_estimate_complete(
    n: usize,
    n_trials: usize,
    seed: u64,
) -> Result<ThresholdSummary> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "complete graph needs >= 2 vertices".into(),
        ));
    }
    summarize_trials(&trials_from(n_trials, seed, |rng| complete_trial(n, rng)))
}

/// Threshold estimate over random (q+1)-regular multigraphs, drawing a
/// fresh graph for every trial from the trial's own substream before
/// running the protocol on it.
pub fn threshold_estimate_random_regular(
    q: usize,
    n: usize,
    n_trials: usize,
    seed: u64,
) -> Result<ThresholdSummary> {
    // Vet the parameters once so the parallel trials cannot fail.
    crate::graph::random_regular(q, n, &mut RngStream::new(seed, u64::MAX))?;
    let results = trials_from(n_trials, seed, |rng| {
        let g = crate::graph::random_regular(q, n, rng).expect("parameters were vetted");
        threshold_trial(&g, rng)
    });
    summarize_trials(&results)
}

/// Burn-in schedule for the driven stationary chain.
#[derive(Debug, Clone)]
pub struct BurnInPolicy {
    /// Additions between recurrence checks while approaching the
    /// recurrent class.
    pub recurrence_check_interval: usize,
    /// Further additions after the first recurrent state before the
    /// sample is taken.
    pub extra_additions: usize,
}

impl BurnInPolicy {
    pub fn for_graph(g: &SinkedGraph) -> BurnInPolicy {
        let np = g.num_nonsink();
        BurnInPolicy {
            recurrence_check_interval: (np / 4).max(1),
            extra_additions: 8 * np,
        }
    }
}

fn drive_once(
    g: &SinkedGraph,
    nonsink: &[u32],
    heights: &mut [u64],
    odometer: &mut [u64],
    ws: &mut Workspace,
    rng: &mut RngStream,
) {
    let v = nonsink[rng.uniform_below(nonsink.len() as u64) as usize] as usize;
    heights[v] += 1;
    if heights[v] >= g.graph.degree(v) {
        ws.in_queue[v] = true;
        ws.queue.push_back(v as u32);
        run_sinked(&g.graph, g.sink_mask(), heights, odometer, ws);
    }
}

/// Runs the driven chain (uniform additions on non-sink sites, each
/// followed by stabilization) until the state is recurrent, then for
/// `policy.extra_additions` more additions, and returns the resulting
/// recurrent configuration with sink entries zeroed.
pub fn stationary_sample(g: &SinkedGraph, rng: &mut RngStream, policy: &BurnInPolicy) -> Config {
    let n = g.num_vertices();
    let nonsink: Vec<u32> = g.nonsink_vertices().map(|v| v as u32).collect();
    let mut heights = vec![0u64; n];
    let mut odometer = vec![0u64; n];
    let mut ws = Workspace::for_vertices(n);
    let mut since_check = 0usize;
    loop {
        drive_once(g, &nonsink, &mut heights, &mut odometer, &mut ws, rng);
        since_check += 1;
        if since_check >= policy.recurrence_check_interval {
            since_check = 0;
            let mut probe = heights.clone();
            for &s in g.sinks() {
                probe[s] = 0;
            }
            if is_recurrent(g, &Config::new(probe)).expect("driven states are stable") {
                break;
            }
        }
    }
    for _ in 0..policy.extra_additions {
        drive_once(g, &nonsink, &mut heights, &mut odometer, &mut ws, rng);
    }
    for &s in g.sinks() {
        heights[s] = 0;
    }
    Config::new(heights)
}

/// Stationary mean height under both conventions: averaged over the
/// non-sink sites and averaged over all vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryDensity {
    pub per_nonsink: Estimate,
    pub per_vertex: Estimate,
}

/// Mean stationary density over independent chains (sample i uses
/// substream i and its own burn-in from the empty configuration).
pub fn stationary_density_estimate(
    g: &SinkedGraph,
    n_samples: usize,
    seed: u64,
    policy: &BurnInPolicy,
) -> Result<StationaryDensity> {
    if n_samples < 2 {
        return Err(Error::TooFewTrials);
    }
    let totals: Vec<u64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i);
            stationary_sample(g, &mut rng, policy).total()
        })
        .collect();
    let np = g.num_nonsink() as f64;
    let nv = g.num_vertices() as f64;
    let per_nonsink: Vec<f64> = totals.iter().map(|&t| t as f64 / np).collect();
    let per_vertex: Vec<f64> = totals.iter().map(|&t| t as f64 / nv).collect();
    Ok(StationaryDensity {
        per_nonsink: Estimate::from_values(&per_nonsink)?,
        per_vertex: Estimate::from_values(&per_vertex)?,
    })
}

/// Stationary law of the height at one site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSummary {
    pub height: Estimate,
    pub histogram: [u64; 9],
}

pub fn stationary_site_estimate(
    g: &SinkedGraph,
    site: usize,
    n_samples: usize,
    seed: u64,
    policy: &BurnInPolicy,
) -> Result<SiteSummary> {
    if site >= g.num_vertices() {
        return Err(Error::VertexOutOfRange {
            v: site,
            n: g.num_vertices(),
        });
    }
    if g.is_sink(site) {
        return Err(Error::InvalidParameter(format!(
            "site {site} is a sink; its height is not defined"
        )));
    }
    if n_samples < 2 {
        return Err(Error::TooFewTrials);
    }
    let samples: Vec<u64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i);
            stationary_sample(g, &mut rng, policy).get(site)
        })
        .collect();
    let values: Vec<f64> = samples.iter().map(|&h| h as f64).collect();
    Ok(SiteSummary {
        height: Estimate::from_values(&values)?,
        histogram: build_histogram(&samples),
    })
}

/// One point of a response curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    pub lambda: f64,
    pub density: Estimate,
}

fn response_curve<F>(
    lambda_grid: &[f64],
    trials: usize,
    seed: u64,
    value: F,
) -> Result<Vec<ResponsePoint>>
where
    F: Fn(f64, &mut RngStream) -> f64 + Sync,
{
    check_grid(lambda_grid)?;
    if trials < 2 {
        return Err(Error::TooFewTrials);
    }
    lambda_grid
        .iter()
        .enumerate()
        .map(|(li, &lambda)| {
            let values: Vec<f64> = (0..trials as u64)
                .into_par_iter()
                .map(|ti| {
                    let mut rng = RngStream::new(seed, li as u64 * trials as u64 + ti);
                    value(lambda, &mut rng)
                })
                .collect();
            Ok(ResponsePoint {
                lambda,
                density: Estimate::from_values(&values)?,
            })
        })
        .collect()
}

/// Mean height over the non-sink sites after placing i.i.d. Poisson
/// heights on them and stabilizing on the sinked graph, per lambda.
pub fn density_response(
    g: &SinkedGraph,
    lambda_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ResponsePoint>> {
    let n = g.num_vertices();
    let nonsink: Vec<u32> = g.nonsink_vertices().map(|v| v as u32).collect();
    let np = nonsink.len() as f64;
    response_curve(lambda_grid, trials, seed, |lambda, rng| {
        let mut heights = vec![0u64; n];
        for &v in &nonsink {
            heights[v as usize] = rng.poisson(lambda);
        }
        let mut odometer = vec![0u64; n];
        let mut ws = Workspace::for_vertices(n);
        seed_all_unstable(&g.graph, Some(g.sink_mask()), &heights, &mut ws);
        run_sinked(&g.graph, g.sink_mask(), &mut heights, &mut odometer, &mut ws);
        let total: u64 = nonsink.iter().map(|&v| heights[v as usize]).sum();
        total as f64 / np
    })
}

/// Fast response curve for the sinked cycle on n vertices (sink at vertex
/// 0, interior sites 1..n-1). Stream-compatible with [`density_response`]
/// on the same graph.
pub fn density_response_cycle(
    n: usize,
    lambda_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ResponsePoint>> {
    if n < 3 {
        return Err(Error::InvalidParameter("cycle fast path needs n >= 3".into()));
    }
    let sites = (n - 1) as u64;
    response_curve(lambda_grid, trials, seed, |lambda, rng| {
        let mut pile = PathPile::empty(n - 1);
        for v in 1..=sites {
            let k = rng.poisson(lambda);
            for _ in 0..k {
                pile.add(v);
            }
        }
        pile.particles() as f64 / sites as f64
    })
}

/// Fast response curve for the sinked doubled cycle on n vertices.
pub fn density_response_bracelet(
    n: usize,
    lambda_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ResponsePoint>> {
    if n < 3 {
        return Err(Error::InvalidParameter(
            "bracelet fast path needs n >= 3".into(),
        ));
    }
    let sites = (n - 1) as u64;
    response_curve(lambda_grid, trials, seed, |lambda, rng| {
        let mut pile = DoubledPathPile::empty(n - 1);
        for v in 1..=sites {
            let k = rng.poisson(lambda);
            for _ in 0..k {
                pile.add(v);
            }
        }
        let total: u64 = pile.heights().iter().sum();
        total as f64 / sites as f64
    })
}

/// One point of an activity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityPoint {
    pub lambda: f64,
    /// Observed activities with their trial counts, ascending.
    pub activity_counts: Vec<(Ratio<u64>, u64)>,
    /// Trials whose orbit was not found within the step budget.
    pub budget_exhausted: u64,
    pub max_period: u64,
    pub max_transient: u64,
    pub trials: u64,
}

/// Default step budget for orbit searches.
pub fn orbit_step_budget(n_vertices: usize) -> u64 {
    16 * n_vertices as u64 + (1 << 16)
}

/// Activity of the synchronous dynamics started from i.i.d. Poisson
/// heights on every vertex, per lambda. Budget exhaustion is recorded,
/// not fatal.
pub fn activity_response<T: Topology + Sync>(
    top: &T,
    lambda_grid: &[f64],
    trials: usize,
    seed: u64,
    max_steps: u64,
) -> Result<Vec<ActivityPoint>> {
    check_grid(lambda_grid)?;
    if trials == 0 {
        return Err(Error::TooFewTrials);
    }
    let n = top.num_vertices();
    lambda_grid
        .iter()
        .enumerate()
        .map(|(li, &lambda)| {
            let outcomes: Vec<Option<(Ratio<u64>, u64, u64)>> = (0..trials as u64)
                .into_par_iter()
                .map(|ti| {
                    let mut rng = RngStream::new(seed, li as u64 * trials as u64 + ti);
                    let heights: Vec<u64> = (0..n).map(|_| rng.poisson(lambda)).collect();
                    match find_orbit(top, &Config::new(heights), max_steps) {
                        Ok(orbit) => {
                            Some((orbit.activity, orbit.period, orbit.transient_steps))
                        }
                        Err(_) => None,
                    }
                })
                .collect();
            let mut counts: BTreeMap<Ratio<u64>, u64> = BTreeMap::new();
            let mut budget_exhausted = 0u64;
            let mut max_period = 0u64;
            let mut max_transient = 0u64;
            for outcome in outcomes {
                match outcome {
                    Some((activity, period, transient)) => {
                        *counts.entry(activity).or_insert(0) += 1;
                        max_period = max_period.max(period);
                        max_transient = max_transient.max(transient);
                    }
                    None => budget_exhausted += 1,
                }
            }
            Ok(ActivityPoint {
                lambda,
                activity_counts: counts.into_iter().collect(),
                budget_exhausted,
                max_period,
                max_transient,
                trials: trials as u64,
            })
        })
        .collect()
}
