//! Synchronous parallel chip-firing.
//!
//! At each time step every unstable vertex topples exactly once,
//! simultaneously. On a finite sinkless graph the trajectory is eventually
//! periodic; [`find_orbit`] locates the orbit with Brent's cycle detection
//! on full-state equality and reports the activity (average fraction of
//! vertices toppling per step) as an exact rational.
//!
//! The flower-specific helpers expose the quantities that make parallel
//! chip-firing on that family exactly solvable: the per-petal height
//! difference mod 3 is a toppling invariant, and together with the total
//! particle count it pins the eventual activity to one of five values.

use num_rational::Ratio;

use crate::dynamics::Config;
use crate::graph::{MultiGraph, Topology};
use crate::{Error, Result};

/// Orbit of the parallel dynamics: transient length, exact period, and
/// toppling rates over one full period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitSummary {
    pub transient_steps: u64,
    pub period: u64,
    /// Topplings per step per vertex, averaged over one period.
    pub activity: Ratio<u64>,
    /// Per-vertex topplings per step over one period.
    pub per_site_topple_rate: Vec<Ratio<u64>>,
}

/// One synchronous update: every unstable vertex topples once.
pub fn parallel_step<T: Topology>(top: &T, c: &Config) -> Result<Config> {
    check_len(top, c.len())?;
    let mut heights = c.heights().to_vec();
    step_in_place(top, &mut heights, None);
    Ok(Config::new(heights))
}

fn check_len<T: Topology>(top: &T, len: usize) -> Result<()> {
    if len != top.num_vertices() {
        return Err(Error::SizeMismatch {
            expected: top.num_vertices(),
            got: len,
        });
    }
    Ok(())
}

/// Applies one synchronous step in place; returns the number of vertices
/// that toppled. `fires` accumulates per-vertex topple counts when given.
fn step_in_place<T: Topology>(top: &T, heights: &mut [u64], fires: Option<&mut [u64]>) -> usize {
    let n = top.num_vertices();
    let mut unstable = Vec::new();
    for v in 0..n {
        if heights[v] >= top.degree(v) {
            unstable.push(v);
        }
    }
    for &v in &unstable {
        heights[v] -= top.degree(v);
    }
    for &v in &unstable {
        top.for_each_arc(v, |w| heights[w] += 1);
    }
    if let Some(f) = fires {
        for &v in &unstable {
            f[v] += 1;
        }
    }
    unstable.len()
}

/// Finds the eventual orbit by Brent's method on full-state equality.
/// Errors with [`Error::OrbitBudget`] if no repeat shows up within
/// `max_steps` single steps of the hare.
pub fn find_orbit<T: Topology>(top: &T, c: &Config, max_steps: u64) -> Result<OrbitSummary> {
    check_len(top, c.len())?;
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
    }
    let n = top.num_vertices();

    // Phase 1 (Brent): find the period.
    let mut power: u64 = 1;
    let mut lam: u64 = 0;
    let mut tortoise = c.heights().to_vec();
    let mut hare = tortoise.clone();
    step_in_place(top, &mut hare, None);
    let mut steps: u64 = 1;
    lam += 1;
    while tortoise != hare {
        if power == lam {
            tortoise.copy_from_slice(&hare);
            power *= 2;
            lam = 0;
        }
        if steps >= max_steps {
            return Err(Error::OrbitBudget { max_steps });
        }
        step_in_place(top, &mut hare, None);
        steps += 1;
        lam += 1;
    }
    let period = lam;

    // Phase 2: find the transient length with two synchronized walkers a
    // period apart.
    let mut front = c.heights().to_vec();
    for _ in 0..period {
        step_in_place(top, &mut front, None);
    }
    let mut back = c.heights().to_vec();
    let mut transient: u64 = 0;
    while back != front {
        step_in_place(top, &mut back, None);
        step_in_place(top, &mut front, None);
        transient += 1;
    }

    // One full period from the orbit, accumulating topple counts.
    let mut fires = vec![0u64; n];
    let mut state = back;
    let mut total: u64 = 0;
    for _ in 0..period {
        total += step_in_place(top, &mut state, Some(&mut fires)) as u64;
    }
    Ok(OrbitSummary {
        transient_steps: transient,
        period,
        activity: Ratio::new(total, period * n as u64),
        per_site_topple_rate: fires.iter().map(|&f| Ratio::new(f, period)).collect(),
    })
}

/// Pointwise complement `2·deg − 1 − height`; an involution that commutes
/// with [`parallel_step`] whenever both sides stay within the height bound.
pub fn mirror<T: Topology>(top: &T, c: &Config) -> Result<Config> {
    check_len(top, c.len())?;
    let mut out = Vec::with_capacity(c.len());
    for (v, &h) in c.heights().iter().enumerate() {
        let cap = 2 * top.degree(v) - 1;
        if h > cap {
            return Err(Error::InvalidParameter(format!(
                "mirror needs height <= {cap} at vertex {v}, got {h}"
            )));
        }
        out.push(cap - h);
    }
    Ok(Config::new(out))
}

/// Activity of parallel chip-firing on the flower with `n` petals, given
/// the total particle count `R` and the number `Z` of petals whose height
/// difference is divisible by 3. Both quantities are invariant under
/// toppling, and they determine the eventual activity exactly.
pub fn flower_activity_from_rz(n: u64, r: u64, z: u64) -> Result<Ratio<u64>> {
    if z > n {
        return Err(Error::InvalidParameter(format!(
            "flower has {n} petals but Z = {z}"
        )));
    }
    Ok(if r < 3 * n + z {
        Ratio::new(0, 1)
    } else if r < 4 * n {
        Ratio::new(1, 3)
    } else if r < 6 * n {
        Ratio::new(1, 2)
    } else if r < 7 * n - z {
        Ratio::new(2, 3)
    } else {
        Ratio::new(1, 1)
    })
}

/// Checks the flower shape (center 0 of degree 2n, petal k on vertices
/// 2k+1, 2k+2) and returns the petal count.
fn flower_petals(g: &MultiGraph) -> Result<usize> {
    let nv = g.num_vertices();
    if nv < 3 || nv.is_multiple_of(2) {
        return Err(Error::InvalidParameter("not a flower graph".into()));
    }
    let n = (nv - 1) / 2;
    let ok = g.degree(0) == 2 * n as u64
        && (1..nv).all(|v| g.degree(v) == 2)
        && (0..n).all(|k| {
            g.multiplicity(0, 2 * k + 1) == 1
                && g.multiplicity(0, 2 * k + 2) == 1
                && g.multiplicity(2 * k + 1, 2 * k + 2) == 1
        });
    if !ok {
        return Err(Error::InvalidParameter("not a flower graph".into()));
    }
    Ok(n)
}

/// Per-petal height difference mod 3 and the count Z of petals where it
/// vanishes. Invariant under both sequential and parallel toppling.
pub fn petal_invariant(g: &MultiGraph, c: &Config) -> Result<(u64, Vec<u8>)> {
    check_len(g, c.len())?;
    let n = flower_petals(g)?;
    let mut xs = Vec::with_capacity(n);
    let mut z = 0u64;
    for k in 0..n {
        let a = c.get(2 * k + 1);
        let b = c.get(2 * k + 2);
        let x = ((a % 3) + 3 - (b % 3)) % 3;
        if x == 0 {
            z += 1;
        }
        xs.push(x as u8);
    }
    Ok((z, xs))
}

/// Per-vertex height parities; a toppling invariant on any graph whose
/// edges all have even multiplicity, such as the bracelet.
pub fn bracelet_parity(c: &Config) -> Vec<u8> {
    c.heights().iter().map(|&h| (h % 2) as u8).collect()
}
