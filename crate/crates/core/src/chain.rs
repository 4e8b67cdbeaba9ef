//! Avalanche shortcuts for degree-2 chains and their doubled variants.
//!
//! On a path or cycle where every site has degree 2, stable heights are 0
//! or 1, and adding a particle onto a full site has a closed-form effect:
//! the avalanche runs until it fills the nearest empty site on each side,
//! a new empty site appears at the mirror position inside that interval,
//! and the number of topplings is the product of the two distances.
//! Tracking only the empty positions therefore makes one addition
//! O(log n), with the toppling count reported rather than simulated.
//!
//! Doubled graphs (every edge doubled, degree 4) reduce to the same rule:
//! height parities are invariant because every toppling moves particles
//! two at a time, so the pairs perform plain chain dynamics on top of a
//! frozen parity layer.
//!
//! The equality of these shortcuts with the general engine is pinned by
//! the tests at the bottom, which replay identical addition sequences
//! through both routes.

use std::collections::BTreeSet;

/// Chain of `sites` degree-2 sites numbered `1..=sites`, with absorbing
/// walls at positions `0` and `sites+1`. This is the non-sink part of a
/// cycle with one sink vertex.
#[derive(Debug, Clone)]
pub struct PathPile {
    sites: u64,
    /// Empty positions, permanently including both walls.
    empties: BTreeSet<u64>,
    topples: u64,
    absorbed: u64,
}

impl PathPile {
    pub fn empty(sites: usize) -> PathPile {
        let sites = sites as u64;
        PathPile {
            sites,
            empties: (0..=sites + 1).collect(),
            topples: 0,
            absorbed: 0,
        }
    }

    /// Adds one particle at `pos` (in `1..=sites`) and stabilizes.
    /// Returns the number of topplings in the triggered avalanche.
    pub fn add(&mut self, pos: u64) -> u64 {
        debug_assert!(pos >= 1 && pos <= self.sites);
        if self.empties.remove(&pos) {
            return 0;
        }
        let l = *self.empties.range(..pos).next_back().unwrap();
        let r = *self.empties.range(pos + 1..).next().unwrap();
        if l == 0 {
            self.absorbed += 1;
        } else {
            self.empties.remove(&l);
        }
        if r == self.sites + 1 {
            self.absorbed += 1;
        } else {
            self.empties.remove(&r);
        }
        self.empties.insert(l + r - pos);
        let t = (pos - l) * (r - pos);
        self.topples += t;
        t
    }

    pub fn sites(&self) -> u64 {
        self.sites
    }

    pub fn is_full(&self, pos: u64) -> bool {
        !self.empties.contains(&pos)
    }

    /// Interior heights, one entry per site.
    pub fn heights(&self) -> Vec<u64> {
        (1..=self.sites).map(|p| self.is_full(p) as u64).collect()
    }

    pub fn particles(&self) -> u64 {
        self.sites - (self.empties.len() as u64 - 2)
    }

    pub fn total_topples(&self) -> u64 {
        self.topples
    }

    /// Particles lost to the walls.
    pub fn absorbed(&self) -> u64 {
        self.absorbed
    }
}

/// Sinkless cycle of `n` degree-2 sites numbered `0..n`.
#[derive(Debug, Clone)]
pub struct CyclePile {
    n: u64,
    empties: BTreeSet<u64>,
    topples: u64,
}

impl CyclePile {
    pub fn empty(n: usize) -> CyclePile {
        let n = n as u64;
        CyclePile {
            n,
            empties: (0..n).collect(),
            topples: 0,
        }
    }

    /// Adds one particle at `pos` and stabilizes. Returns `None`, leaving
    /// the pile unchanged, when the addition can never stabilize: that
    /// happens exactly when `pos` is full and at most one empty site
    /// remains, since the avalanche would have to topple every site.
    pub fn add(&mut self, pos: u64) -> Option<u64> {
        debug_assert!(pos < self.n);
        if self.empties.remove(&pos) {
            return Some(0);
        }
        if self.empties.len() <= 1 {
            return None;
        }
        let l = *self
            .empties
            .range(..pos)
            .next_back()
            .unwrap_or_else(|| self.empties.iter().next_back().unwrap());
        let r = *self
            .empties
            .range(pos + 1..)
            .next()
            .unwrap_or_else(|| self.empties.iter().next().unwrap());
        let dl = (pos + self.n - l) % self.n;
        let dr = (r + self.n - pos) % self.n;
        self.empties.remove(&l);
        self.empties.remove(&r);
        self.empties.insert((l + dr) % self.n);
        let t = dl * dr;
        self.topples += t;
        Some(t)
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_full(&self, pos: u64) -> bool {
        !self.empties.contains(&pos)
    }

    pub fn heights(&self) -> Vec<u64> {
        (0..self.n).map(|p| self.is_full(p) as u64).collect()
    }

    pub fn particles(&self) -> u64 {
        self.n - self.empties.len() as u64
    }

    pub fn total_topples(&self) -> u64 {
        self.topples
    }
}

/// Non-sink part of a doubled cycle with one sink: pair dynamics on a
/// [`PathPile`] under a frozen parity layer. Heights are `2·pair + parity`.
#[derive(Debug, Clone)]
pub struct DoubledPathPile {
    parity: Vec<u8>,
    pairs: PathPile,
}

impl DoubledPathPile {
    pub fn empty(sites: usize) -> DoubledPathPile {
        DoubledPathPile {
            parity: vec![0; sites],
            pairs: PathPile::empty(sites),
        }
    }

    /// Adds one particle at `pos` (in `1..=sites`); returns topplings.
    pub fn add(&mut self, pos: u64) -> u64 {
        let bit = &mut self.parity[pos as usize - 1];
        if *bit == 0 {
            *bit = 1;
            0
        } else {
            *bit = 0;
            self.pairs.add(pos)
        }
    }

    pub fn heights(&self) -> Vec<u64> {
        (1..=self.pairs.sites())
            .map(|p| 2 * self.pairs.is_full(p) as u64 + self.parity[p as usize - 1] as u64)
            .collect()
    }

    pub fn total_topples(&self) -> u64 {
        self.pairs.total_topples()
    }

    /// Particles lost to the walls (pairs leave two at a time).
    pub fn absorbed(&self) -> u64 {
        2 * self.pairs.absorbed()
    }
}

/// Sinkless doubled cycle: pair dynamics on a [`CyclePile`] under a
/// frozen parity layer.
#[derive(Debug, Clone)]
pub struct DoubledCyclePile {
    parity: Vec<u8>,
    pairs: CyclePile,
}

impl DoubledCyclePile {
    pub fn empty(n: usize) -> DoubledCyclePile {
        DoubledCyclePile {
            parity: vec![0; n],
            pairs: CyclePile::empty(n),
        }
    }

    /// Adds one particle at `pos`; `None` (state unchanged) when the
    /// addition can never stabilize.
    pub fn add(&mut self, pos: u64) -> Option<u64> {
        let bit = self.parity[pos as usize];
        if bit == 0 {
            self.parity[pos as usize] = 1;
            Some(0)
        } else {
            let t = self.pairs.add(pos)?;
            self.parity[pos as usize] = 0;
            Some(t)
        }
    }

    pub fn heights(&self) -> Vec<u64> {
        (0..self.pairs.len())
            .map(|p| 2 * self.pairs.is_full(p) as u64 + self.parity[p as usize] as u64)
            .collect()
    }

    pub fn particles(&self) -> u64 {
        2 * self.pairs.particles() + self.parity.iter().map(|&b| b as u64).sum::<u64>()
    }

    pub fn total_topples(&self) -> u64 {
        self.pairs.total_topples()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{self, Config, StabilizeOutcome};
    use crate::graph;
    use crate::rng::RngStream;

    #[test]
    fn full_path_reflects_the_new_empty_site() {
        let mut pile = PathPile::empty(3);
        assert_eq!(pile.add(1), 0);
        assert_eq!(pile.add(2), 0);
        assert_eq!(pile.add(3), 0);
        // Walls at 0 and 4; adding at 2 topples 2*2 = 4 times and leaves
        // the empty site back at the mirror position 2.
        assert_eq!(pile.add(2), 4);
        assert_eq!(pile.heights(), &[1, 0, 1]);
        assert_eq!(pile.absorbed(), 2);
    }

    #[test]
    fn path_pile_matches_the_general_engine() {
        let mut rng = RngStream::new(31, 0);
        for _ in 0..20 {
            let n = 5 + rng.uniform_below(6) as usize;
            let g = graph::cycle_with_sink(n).unwrap();
            let mut pile = PathPile::empty(n - 1);
            let mut c = Config::zeros(n);
            for _ in 0..4 * n {
                let v = 1 + rng.uniform_below(n as u64 - 1);
                let t = pile.add(v);
                let (next, od) = dynamics::add_and_stabilize(&g, &c, v as usize).unwrap();
                assert_eq!(od.total(), t);
                assert_eq!(&next.heights()[1..], &pile.heights()[..]);
                assert_eq!(next.heights()[0], pile.absorbed());
                c = next;
            }
        }
    }

    #[test]
    fn doubled_path_pile_matches_the_general_engine() {
        let mut rng = RngStream::new(32, 0);
        for _ in 0..12 {
            let n = 4 + rng.uniform_below(5) as usize;
            let g = graph::bracelet_with_sink(n).unwrap();
            let mut pile = DoubledPathPile::empty(n - 1);
            let mut c = Config::zeros(n);
            for _ in 0..8 * n {
                let v = 1 + rng.uniform_below(n as u64 - 1);
                let t = pile.add(v);
                let (next, od) = dynamics::add_and_stabilize(&g, &c, v as usize).unwrap();
                assert_eq!(od.total(), t);
                assert_eq!(&next.heights()[1..], &pile.heights()[..]);
                assert_eq!(next.heights()[0], pile.absorbed());
                c = next;
            }
        }
    }

    #[test]
    fn cycle_pile_matches_detection_on_the_general_engine() {
        let mut rng = RngStream::new(33, 0);
        for _ in 0..30 {
            let n = 4 + rng.uniform_below(6) as usize;
            let g = graph::cycle(n).unwrap();
            let mut pile = CyclePile::empty(n);
            let mut heights = vec![0u64; n];
            loop {
                let v = rng.uniform_below(n as u64);
                let mut with_add = heights.clone();
                with_add[v as usize] += 1;
                let outcome = dynamics::stabilize_or_detect(&g, &Config::new(with_add)).unwrap();
                match (pile.add(v), outcome) {
                    (Some(t), StabilizeOutcome::Stabilized(c, od)) => {
                        assert_eq!(od.total(), t);
                        assert_eq!(c.heights(), &pile.heights()[..]);
                        heights = c.into_heights();
                    }
                    (None, StabilizeOutcome::NonStabilizing) => break,
                    (pile_says, engine_says) =>
                        panic!("disagreement: pile={pile_says:?} engine={engine_says:?}"),
                }
            }
        }
    }

    #[test]
    fn doubled_cycle_pile_matches_detection_on_the_general_engine() {
        let mut rng = RngStream::new(34, 0);
        for _ in 0..20 {
            let n = 3 + rng.uniform_below(5) as usize;
            let g = graph::bracelet(n).unwrap();
            let mut pile = DoubledCyclePile::empty(n);
            let mut heights = vec![0u64; n];
            loop {
                let v = rng.uniform_below(n as u64);
                let mut with_add = heights.clone();
                with_add[v as usize] += 1;
                let outcome = dynamics::stabilize_or_detect(&g, &Config::new(with_add)).unwrap();
                match (pile.add(v), outcome) {
                    (Some(t), StabilizeOutcome::Stabilized(c, od)) => {
                        assert_eq!(od.total(), t);
                        assert_eq!(c.heights(), &pile.heights()[..]);
                        heights = c.into_heights();
                    }
                    (None, StabilizeOutcome::NonStabilizing) => break,
                    (pile_says, engine_says) =>
                        panic!("disagreement: pile={pile_says:?} engine={engine_says:?}"),
                }
            }
        }
    }

    #[test]
    fn cycle_saturation_is_the_only_survivor() {
        let n = 5;
        let mut pile = CyclePile::empty(n);
        for pos in 0..n as u64 {
            assert_eq!(pile.add(pos), Some(0));
        }
        assert_eq!(pile.particles(), 5);
        // All sites full: any further addition can never stabilize.
        assert_eq!(pile.add(3), None);
        assert_eq!(pile.particles(), 5);
    }

    #[test]
    fn particle_accounting_balances() {
        let mut rng = RngStream::new(35, 0);
        let mut pile = PathPile::empty(50);
        for added in 1..=400u64 {
            pile.add(1 + rng.uniform_below(50));
            assert_eq!(pile.particles() + pile.absorbed(), added);
        }
    }
}
