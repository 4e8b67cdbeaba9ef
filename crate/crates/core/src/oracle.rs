//! Deliberately naive reference implementations.
//!
//! Everything here trades speed for obviousness: one toppling at a time,
//! full rescans, breadth-first closures over whole state spaces. The fast
//! engine in [`crate::dynamics`] and the closed-form routes elsewhere are
//! tested against these on small instances.

use std::collections::{BTreeSet, VecDeque};

use crate::dynamics::Config;
use crate::graph::{SinkedGraph, Topology};
use crate::rng::RngStream;

fn is_sink(sink_mask: Option<&[bool]>, v: usize) -> bool {
    sink_mask.is_some_and(|m| m[v])
}

fn unstable_vertices<T: Topology>(
    top: &T,
    sink_mask: Option<&[bool]>,
    heights: &[u64],
) -> Vec<usize> {
    (0..top.num_vertices())
        .filter(|&v| !is_sink(sink_mask, v) && heights[v] >= top.degree(v))
        .collect()
}

fn topple_once<T: Topology>(top: &T, heights: &mut [u64], odometer: &mut [u64], v: usize) {
    heights[v] -= top.degree(v);
    odometer[v] += 1;
    top.for_each_arc(v, |w| heights[w] += 1);
}

/// Topples the lowest-index unstable vertex, once, until stable.
pub fn naive_stabilize<T: Topology>(
    top: &T,
    sink_mask: Option<&[bool]>,
    c: &Config,
) -> (Config, Vec<u64>) {
    let mut heights = c.heights().to_vec();
    let mut odometer = vec![0u64; heights.len()];
    loop {
        match unstable_vertices(top, sink_mask, &heights).first() {
            Some(&v) => topple_once(top, &mut heights, &mut odometer, v),
            None => return (Config::new(heights), odometer),
        }
    }
}

/// Topples a uniformly random unstable vertex, once, until stable.
pub fn random_order_stabilize<T: Topology>(
    top: &T,
    sink_mask: Option<&[bool]>,
    c: &Config,
    rng: &mut RngStream,
) -> (Config, Vec<u64>) {
    let mut heights = c.heights().to_vec();
    let mut odometer = vec![0u64; heights.len()];
    loop {
        let unstable = unstable_vertices(top, sink_mask, &heights);
        if unstable.is_empty() {
            return (Config::new(heights), odometer);
        }
        let v = unstable[rng.uniform_below(unstable.len() as u64) as usize];
        topple_once(top, &mut heights, &mut odometer, v);
    }
}

/// Topples the unstable vertex of greatest height (lowest index on ties),
/// once, until stable.
pub fn greedy_max_stabilize<T: Topology>(
    top: &T,
    sink_mask: Option<&[bool]>,
    c: &Config,
) -> (Config, Vec<u64>) {
    let mut heights = c.heights().to_vec();
    let mut odometer = vec![0u64; heights.len()];
    loop {
        let unstable = unstable_vertices(top, sink_mask, &heights);
        let Some(&v) = unstable.iter().max_by_key(|&&v| (heights[v], usize::MAX - v)) else {
            return (Config::new(heights), odometer);
        };
        topple_once(top, &mut heights, &mut odometer, v);
    }
}

/// Single-toppling stabilization on a sinkless graph that gives up the
/// moment every vertex has toppled at least once since the start.
pub fn naive_detect<T: Topology>(top: &T, c: &Config) -> Option<(Config, Vec<u64>)> {
    let n = top.num_vertices();
    let mut heights = c.heights().to_vec();
    let mut odometer = vec![0u64; n];
    loop {
        if odometer.iter().all(|&t| t > 0) {
            return None;
        }
        match unstable_vertices(top, None, &heights).first() {
            Some(&v) => topple_once(top, &mut heights, &mut odometer, v),
            None => return Some((Config::new(heights), odometer)),
        }
    }
}

/// The recurrent configurations as the closure of the maximal stable
/// configuration under "add one particle anywhere, then stabilize".
/// Exponential in the graph size; keep instances tiny.
pub fn reachable_recurrent_set(g: &SinkedGraph) -> BTreeSet<Vec<u64>> {
    let n = g.num_vertices();
    let mut start = vec![0u64; n];
    for v in g.nonsink_vertices() {
        start[v] = g.graph.degree(v) - 1;
    }
    let mut seen = BTreeSet::new();
    let mut frontier = VecDeque::new();
    seen.insert(start.clone());
    frontier.push_back(start);
    while let Some(heights) = frontier.pop_front() {
        for v in g.nonsink_vertices() {
            let mut next = heights.clone();
            next[v] += 1;
            let (stable, _) = naive_stabilize(&g.graph, Some(g.sink_mask()), &Config::new(next));
            let mut key = stable.into_heights();
            for &s in g.sinks() {
                key[s] = 0;
            }
            if seen.insert(key.clone()) {
                frontier.push_back(key);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{self, StabilizeOutcome};
    use crate::graph;

    fn random_heights(n: usize, max: u64, rng: &mut RngStream) -> Config {
        Config::new((0..n).map(|_| rng.uniform_below(max + 1)).collect())
    }

    #[test]
    fn naive_matches_frozen_small_cases() {
        let g = graph::cycle_with_sink(4).unwrap();
        let (c, od) =
            naive_stabilize(&g.graph, Some(g.sink_mask()), &Config::new(vec![0, 2, 2, 2]));
        assert_eq!(c.heights(), &[4, 1, 0, 1]);
        assert_eq!(od, vec![0, 2, 3, 2]);
    }

    #[test]
    fn all_toppling_orders_agree_with_the_fast_engine() {
        let mut rng = RngStream::new(72026, 0);
        for trial in 0..60 {
            let g = match trial % 4 {
                0 => graph::bracelet_with_sink(5).unwrap(),
                1 => graph::flower_with_sink(3).unwrap(),
                2 => graph::lollipop_with_sink(3).unwrap(),
                _ => graph::ladder_with_sinks(4).unwrap(),
            };
            let n = g.num_vertices();
            let c = random_heights(n, 6, &mut rng);
            let (fast, fast_od) = dynamics::stabilize(&g, &c).unwrap();
            let (a, a_od) = naive_stabilize(&g.graph, Some(g.sink_mask()), &c);
            let (b, b_od) =
                random_order_stabilize(&g.graph, Some(g.sink_mask()), &c, &mut rng);
            let (d, d_od) = greedy_max_stabilize(&g.graph, Some(g.sink_mask()), &c);
            assert_eq!(fast, a);
            assert_eq!(fast, b);
            assert_eq!(fast, d);
            assert_eq!(fast_od.topples(), &a_od[..]);
            assert_eq!(fast_od.topples(), &b_od[..]);
            assert_eq!(fast_od.topples(), &d_od[..]);
        }
    }

    #[test]
    fn naive_detect_agrees_with_the_fast_engine() {
        let mut rng = RngStream::new(82026, 0);
        for trial in 0..80 {
            let g = if trial % 2 == 0 {
                graph::cycle(5).unwrap()
            } else {
                graph::bracelet(4).unwrap()
            };
            let c = random_heights(g.num_vertices(), 5, &mut rng);
            let fast = dynamics::stabilize_or_detect(&g, &c).unwrap();
            match (naive_detect(&g, &c), fast) {
                (Some((nc, nod)), StabilizeOutcome::Stabilized(fc, fod)) => {
                    assert_eq!(nc, fc);
                    assert_eq!(&nod[..], fod.topples());
                }
                (None, StabilizeOutcome::NonStabilizing) => {}
                (naive, fast) => panic!("disagreement: naive={naive:?} fast={fast:?}"),
            }
        }
    }

    #[test]
    fn burning_matches_reachability_closure() {
        for g in [
            graph::cycle_with_sink(4).unwrap(),
            graph::bracelet_with_sink(4).unwrap(),
            graph::complete_with_sink(3).unwrap(),
            graph::ladder_with_sinks(3).unwrap(),
        ] {
            let reachable = reachable_recurrent_set(&g);
            let by_burning: Vec<Vec<u64>> = dynamics::enumerate_recurrent(&g)
                .unwrap()
                .into_iter()
                .map(Config::into_heights)
                .collect();
            let burning_set: BTreeSet<Vec<u64>> = by_burning.iter().cloned().collect();
            assert_eq!(burning_set.len(), by_burning.len());
            assert_eq!(reachable, burning_set);
        }
    }
}
