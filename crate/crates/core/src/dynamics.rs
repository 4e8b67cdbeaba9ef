//! Sequential abelian sandpile dynamics.
//!
//! A configuration assigns a 64-bit particle count to every vertex. A
//! non-sink vertex `v` is unstable when its height reaches its degree; one
//! toppling sends one particle along each incident arc. Stabilization
//! topples until no non-sink vertex is unstable. The engine keeps a FIFO
//! worklist and topples `floor(height/degree)` times per visit; the abelian
//! property makes the result independent of these scheduling choices, which
//! the oracle tests check against deliberately naive implementations.

use std::collections::VecDeque;

use crate::graph::{SinkedGraph, Topology};
use crate::{Error, Result};

/// Particle heights, one entry per vertex (sinks included; absorbed mass
/// accumulates on sink entries).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    heights: Vec<u64>,
}

impl Config {
    pub fn new(heights: Vec<u64>) -> Config {
        Config { heights }
    }

    pub fn zeros(n: usize) -> Config {
        Config {
            heights: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn get(&self, v: usize) -> u64 {
        self.heights[v]
    }

    pub fn heights(&self) -> &[u64] {
        &self.heights
    }

    pub fn into_heights(self) -> Vec<u64> {
        self.heights
    }

    pub fn total(&self) -> u64 {
        self.heights.iter().sum()
    }

    /// True when every non-sink vertex is below its degree. Pass `None`
    /// for sinkless graphs.
    pub fn is_stable_on<T: Topology>(&self, top: &T, sink_mask: Option<&[bool]>) -> bool {
        self.heights.iter().enumerate().all(|(v, &h)| {
            sink_mask.is_some_and(|m| m[v]) || h < top.degree(v)
        })
    }

    /// Single-line decimal form, e.g. `2 3 0 1`.
    pub fn to_line(&self) -> String {
        let strs: Vec<String> = self.heights.iter().map(u64::to_string).collect();
        strs.join(" ")
    }

    pub fn from_line(line: &str) -> Result<Config> {
        let heights: std::result::Result<Vec<u64>, _> =
            line.split_whitespace().map(str::parse).collect();
        heights
            .map(Config::new)
            .map_err(|_| Error::Parse(format!("bad configuration line {line:?}")))
    }
}

impl From<Vec<u64>> for Config {
    fn from(heights: Vec<u64>) -> Config {
        Config::new(heights)
    }
}

/// Topple counts accumulated by one stabilization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Odometer {
    topples: Vec<u64>,
}

impl Odometer {
    pub fn new(topples: Vec<u64>) -> Odometer {
        Odometer { topples }
    }

    pub fn get(&self, v: usize) -> u64 {
        self.topples[v]
    }

    pub fn topples(&self) -> &[u64] {
        &self.topples
    }

    pub fn total(&self) -> u64 {
        self.topples.iter().sum()
    }
}

/// Result of stabilizing on a sinkless graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilizeOutcome {
    Stabilized(Config, Odometer),
    /// Every vertex toppled at least once, which certifies the
    /// configuration can never stabilize.
    NonStabilizing,
}

/// Reusable queue buffers for repeated stabilizations.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    pub queue: VecDeque<u32>,
    pub in_queue: Vec<bool>,
}

impl Workspace {
    pub fn for_vertices(n: usize) -> Workspace {
        Workspace {
            queue: VecDeque::new(),
            in_queue: vec![false; n],
        }
    }

    /// Drains a queue left dirty by an aborted detection run.
    pub fn reset(&mut self) {
        while let Some(v) = self.queue.pop_front() {
            self.in_queue[v as usize] = false;
        }
    }
}

fn check_len<T: Topology>(top: &T, c: &Config) -> Result<()> {
    if c.len() != top.num_vertices() {
        return Err(Error::SizeMismatch {
            expected: top.num_vertices(),
            got: c.len(),
        });
    }
    Ok(())
}

/// Core sinked loop. Queue must be seeded with the unstable vertices.
pub(crate) fn run_sinked<T: Topology>(
    top: &T,
    sink_mask: &[bool],
    heights: &mut [u64],
    odometer: &mut [u64],
    ws: &mut Workspace,
) -> u64 {
    let mut topples = 0u64;
    while let Some(v) = ws.queue.pop_front() {
        let v = v as usize;
        ws.in_queue[v] = false;
        let d = top.degree(v);
        let t = heights[v] / d;
        if t == 0 {
            continue;
        }
        heights[v] -= t * d;
        odometer[v] += t;
        topples += t;
        top.for_each_arc(v, |w| {
            heights[w] += t;
            if !sink_mask[w] && !ws.in_queue[w] && heights[w] >= top.degree(w) {
                ws.in_queue[w] = true;
                ws.queue.push_back(w as u32);
            }
        });
        // Loops return particles to v itself; re-queue if still unstable.
        if heights[v] >= d && !ws.in_queue[v] {
            ws.in_queue[v] = true;
            ws.queue.push_back(v as u32);
        }
    }
    topples
}

/// Core sinkless loop with non-stabilization detection. `topple_stamp`
/// entries equal to `stamp` mark vertices that toppled in this run; the
/// loop aborts the instant all `n` have. Returns `None` on abort (heights
/// are then mid-avalanche and should be discarded) and the topple total on
/// stabilization.
pub(crate) fn run_detect<T: Topology>(
    top: &T,
    heights: &mut [u64],
    mut odometer: Option<&mut [u64]>,
    topple_stamp: &mut [u32],
    stamp: u32,
    ws: &mut Workspace,
) -> Option<u64> {
    let n = top.num_vertices();
    let mut distinct = 0usize;
    let mut topples = 0u64;
    while let Some(v) = ws.queue.pop_front() {
        let v = v as usize;
        ws.in_queue[v] = false;
        let d = top.degree(v);
        let t = heights[v] / d;
        if t == 0 {
            continue;
        }
        if topple_stamp[v] != stamp {
            topple_stamp[v] = stamp;
            distinct += 1;
            if distinct == n {
                return None;
            }
        }
        heights[v] -= t * d;
        if let Some(od) = odometer.as_deref_mut() {
            od[v] += t;
        }
        topples += t;
        top.for_each_arc(v, |w| {
            heights[w] += t;
            if !ws.in_queue[w] && heights[w] >= top.degree(w) {
                ws.in_queue[w] = true;
                ws.queue.push_back(w as u32);
            }
        });
        if heights[v] >= d && !ws.in_queue[v] {
            ws.in_queue[v] = true;
            ws.queue.push_back(v as u32);
        }
    }
    Some(topples)
}

pub(crate) fn seed_all_unstable<T: Topology>(
    top: &T,
    sink_mask: Option<&[bool]>,
    heights: &[u64],
    ws: &mut Workspace,
) {
    ws.queue.clear();
    for v in 0..top.num_vertices() {
        let is_sink = sink_mask.is_some_and(|m| m[v]);
        if !is_sink && heights[v] >= top.degree(v) {
            ws.in_queue[v] = true;
            ws.queue.push_back(v as u32);
        } else {
            ws.in_queue[v] = false;
        }
    }
}

/// Stabilizes `c` on a sinked graph. Sinks absorb; their entries in the
/// result carry the absorbed mass. Terminates for every input.
pub fn stabilize(g: &SinkedGraph, c: &Config) -> Result<(Config, Odometer)> {
    check_len(&g.graph, c)?;
    let mut heights = c.heights().to_vec();
    let mut odometer = vec![0u64; heights.len()];
    let mut ws = Workspace::for_vertices(heights.len());
    seed_all_unstable(&g.graph, Some(g.sink_mask()), &heights, &mut ws);
    run_sinked(&g.graph, g.sink_mask(), &mut heights, &mut odometer, &mut ws);
    Ok((Config::new(heights), Odometer::new(odometer)))
}

/// Adds one particle at `v` to a stable configuration and stabilizes.
pub fn add_and_stabilize(g: &SinkedGraph, c: &Config, v: usize) -> Result<(Config, Odometer)> {
    check_len(&g.graph, c)?;
    if v >= g.num_vertices() {
        return Err(Error::VertexOutOfRange {
            v,
            n: g.num_vertices(),
        });
    }
    if !c.is_stable_on(&g.graph, Some(g.sink_mask())) {
        return Err(Error::UnstableInput);
    }
    let mut heights = c.heights().to_vec();
    let mut odometer = vec![0u64; heights.len()];
    heights[v] += 1;
    let mut ws = Workspace::for_vertices(heights.len());
    if !g.is_sink(v) && heights[v] >= g.graph.degree(v) {
        ws.in_queue[v] = true;
        ws.queue.push_back(v as u32);
    }
    run_sinked(&g.graph, g.sink_mask(), &mut heights, &mut odometer, &mut ws);
    Ok((Config::new(heights), Odometer::new(odometer)))
}

/// Stabilizes on a sinkless graph, or certifies non-stabilization the
/// instant every vertex has toppled at least once.
pub fn stabilize_or_detect<T: Topology>(top: &T, c: &Config) -> Result<StabilizeOutcome> {
    check_len(top, c)?;
    let n = top.num_vertices();
    let mut heights = c.heights().to_vec();
    let mut odometer = vec![0u64; n];
    let mut stamps = vec![0u32; n];
    let mut ws = Workspace::for_vertices(n);
    seed_all_unstable(top, None, &heights, &mut ws);
    match run_detect(top, &mut heights, Some(&mut odometer), &mut stamps, 1, &mut ws) {
        Some(_) => Ok(StabilizeOutcome::Stabilized(
            Config::new(heights),
            Odometer::new(odometer),
        )),
        None => Ok(StabilizeOutcome::NonStabilizing),
    }
}

/// Burning test: a stable configuration is recurrent for the driven chain
/// exactly when toppling the sinks once more makes every non-sink vertex
/// topple exactly once.
pub fn is_recurrent(g: &SinkedGraph, c: &Config) -> Result<bool> {
    check_len(&g.graph, c)?;
    if !c.is_stable_on(&g.graph, Some(g.sink_mask())) {
        return Err(Error::UnstableInput);
    }
    let mut heights = c.heights().to_vec();
    for &s in g.sinks() {
        g.graph.for_each_arc(s, |w| {
            if !g.is_sink(w) {
                heights[w] += 1;
            }
        });
    }
    let mut odometer = vec![0u64; heights.len()];
    let mut ws = Workspace::for_vertices(heights.len());
    seed_all_unstable(&g.graph, Some(g.sink_mask()), &heights, &mut ws);
    run_sinked(&g.graph, g.sink_mask(), &mut heights, &mut odometer, &mut ws);
    Ok(g.nonsink_vertices().all(|v| odometer[v] == 1))
}

/// Default ceiling on the number of stable configurations
/// [`enumerate_recurrent`] will walk.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

/// Enumerates all recurrent configurations in lexicographic height order
/// (sink entries are zero). Errors if the stable-configuration count
/// exceeds the budget.
pub fn enumerate_recurrent(g: &SinkedGraph) -> Result<Vec<Config>> {
    enumerate_recurrent_with_budget(g, ENUMERATION_BUDGET)
}

pub fn enumerate_recurrent_with_budget(g: &SinkedGraph, budget: u128) -> Result<Vec<Config>> {
    let vprime: Vec<usize> = g.nonsink_vertices().collect();
    let mut required: u128 = 1;
    for &v in &vprime {
        required = required.saturating_mul(g.graph.degree(v) as u128);
        if required > budget {
            return Err(Error::EnumerationBudget { budget, required });
        }
    }
    let n = g.num_vertices();
    let mut digits = vec![0u64; vprime.len()];
    let mut out = Vec::new();
    loop {
        let mut heights = vec![0u64; n];
        for (i, &v) in vprime.iter().enumerate() {
            heights[v] = digits[i];
        }
        let c = Config::new(heights);
        if is_recurrent(g, &c)? {
            out.push(c);
        }
        // Mixed-radix increment, last vertex fastest.
        let mut pos = vprime.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < g.graph.degree(vprime[pos]) {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;

    fn config(h: &[u64]) -> Config {
        Config::new(h.to_vec())
    }

    #[test]
    fn single_toppling_on_sinked_cycle() {
        let g = graph::cycle_with_sink(4).unwrap();
        let (c, od) = stabilize(&g, &config(&[0, 2, 0, 0])).unwrap();
        assert_eq!(c.heights(), &[1, 0, 1, 0]);
        assert_eq!(od.topples(), &[0, 1, 0, 0]);
    }

    #[test]
    fn cascade_on_sinked_cycle() {
        let g = graph::cycle_with_sink(4).unwrap();
        let (c, od) = stabilize(&g, &config(&[0, 2, 2, 2])).unwrap();
        assert_eq!(c.heights(), &[4, 1, 0, 1]);
        assert_eq!(od.topples(), &[0, 2, 3, 2]);
        // Mass balance: 6 particles in, 2 retained, 4 absorbed.
        assert_eq!(c.total(), 6);
    }

    #[test]
    fn add_and_stabilize_on_sinked_cycle() {
        let g = graph::cycle_with_sink(4).unwrap();
        let (c, od) = add_and_stabilize(&g, &config(&[0, 1, 1, 1]), 2).unwrap();
        assert_eq!(c.heights(), &[2, 1, 0, 1]);
        assert_eq!(od.topples(), &[0, 1, 2, 1]);
    }

    #[test]
    fn add_at_sink_is_absorbed() {
        let g = graph::cycle_with_sink(4).unwrap();
        let (c, od) = add_and_stabilize(&g, &config(&[0, 1, 1, 1]), 0).unwrap();
        assert_eq!(c.heights(), &[1, 1, 1, 1]);
        assert_eq!(od.total(), 0);
    }

    #[test]
    fn add_and_stabilize_rejects_unstable_input() {
        let g = graph::cycle_with_sink(4).unwrap();
        let err = add_and_stabilize(&g, &config(&[0, 2, 0, 0]), 1).unwrap_err();
        assert_eq!(err, Error::UnstableInput);
    }

    #[test]
    fn detect_stabilizes_on_sinkless_cycle() {
        let g = graph::cycle(4).unwrap();
        match stabilize_or_detect(&g, &config(&[2, 1, 0, 0])).unwrap() {
            StabilizeOutcome::Stabilized(c, od) => {
                assert_eq!(c.heights(), &[1, 0, 1, 1]);
                assert_eq!(od.topples(), &[1, 1, 0, 0]);
            }
            StabilizeOutcome::NonStabilizing => panic!("should stabilize"),
        }
    }

    #[test]
    fn detect_flags_non_stabilizing_cycle_config() {
        let g = graph::cycle(4).unwrap();
        let outcome = stabilize_or_detect(&g, &config(&[2, 1, 1, 0])).unwrap();
        assert_eq!(outcome, StabilizeOutcome::NonStabilizing);
    }

    #[test]
    fn degenerate_torus_never_stabilizes_once_saturated() {
        // Side 1: a single vertex with two loops keeps its four particles.
        let g = graph::torus(1).unwrap();
        let outcome = stabilize_or_detect(&g, &config(&[4])).unwrap();
        assert_eq!(outcome, StabilizeOutcome::NonStabilizing);
        match stabilize_or_detect(&g, &config(&[3])).unwrap() {
            StabilizeOutcome::Stabilized(c, _) => assert_eq!(c.heights(), &[3]),
            StabilizeOutcome::NonStabilizing => panic!("3 < 4 is stable"),
        }
    }

    #[test]
    fn burning_on_sinked_bracelet() {
        let g = graph::bracelet_with_sink(4).unwrap();
        assert!(is_recurrent(&g, &config(&[0, 2, 3, 2])).unwrap());
        assert!(!is_recurrent(&g, &config(&[0, 1, 1, 3])).unwrap());
    }

    #[test]
    fn burning_on_sinked_cycle_five() {
        let g = graph::cycle_with_sink(5).unwrap();
        assert!(is_recurrent(&g, &config(&[0, 1, 1, 1, 1])).unwrap());
        assert!(!is_recurrent(&g, &config(&[0, 0, 1, 1, 0])).unwrap());
        assert!(is_recurrent(&g, &config(&[0, 1, 0, 1, 1])).unwrap());
    }

    #[test]
    fn burning_rejects_unstable_input() {
        let g = graph::cycle_with_sink(4).unwrap();
        assert_eq!(
            is_recurrent(&g, &config(&[0, 2, 0, 0])).unwrap_err(),
            Error::UnstableInput
        );
    }

    #[test]
    fn recurrent_enumeration_on_small_sinked_graphs() {
        let k3 = graph::complete_with_sink(3).unwrap();
        let rec = enumerate_recurrent(&k3).unwrap();
        let heights: Vec<&[u64]> = rec.iter().map(Config::heights).collect();
        assert_eq!(heights, vec![&[0, 0, 1][..], &[0, 1, 0], &[0, 1, 1]]);

        let z4 = graph::cycle_with_sink(4).unwrap();
        let rec = enumerate_recurrent(&z4).unwrap();
        assert_eq!(rec.len(), 4);
        assert!(rec.iter().all(|c| {
            let zeros = c.heights()[1..].iter().filter(|&&h| h == 0).count();
            zeros <= 1
        }));
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let g = graph::bracelet_with_sink(20).unwrap();
        // 4^19 stable configurations is over a 10^6 budget.
        let err = enumerate_recurrent_with_budget(&g, 1_000_000).unwrap_err();
        match err {
            Error::EnumerationBudget { budget, .. } => assert_eq!(budget, 1_000_000),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn stabilize_checks_length() {
        let g = graph::cycle_with_sink(4).unwrap();
        assert!(stabilize(&g, &config(&[0, 0])).is_err());
    }

    #[test]
    fn config_line_round_trip() {
        let c = config(&[2, 3, 0, 1]);
        let line = c.to_line();
        assert_eq!(line, "2 3 0 1");
        assert_eq!(Config::from_line(&line).unwrap(), c);
        assert!(Config::from_line("1 x 2").is_err());
    }
}
