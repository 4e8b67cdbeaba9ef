//! Exact subgraph counting.
//!
//! Spanning trees are counted with the matrix-tree determinant, evaluated
//! by fraction-free integer elimination so results are exact at any size.
//! Spanning connected unicyclic subgraphs are counted by walking all
//! edge subsets of the right cardinality, which caps usable instances at
//! [`UNICYCLIC_EDGE_BUDGET`] edges. Parallel edges are distinct objects in
//! both counts, and a loop counts as a cycle of length one.

use num_bigint::{BigInt, BigUint, Sign};

use crate::graph::{MultiGraph, SinkedGraph};
use crate::{Error, Result};

/// Number of spanning trees of the graph obtained by identifying the
/// `collapse` vertices into a single vertex.
pub fn spanning_tree_count(g: &MultiGraph, collapse: &[usize]) -> Result<BigUint> {
    if collapse.is_empty() {
        return Err(Error::InvalidParameter(
            "collapse set must be nonempty".into(),
        ));
    }
    let n = g.num_vertices();
    let mut collapsed = vec![false; n];
    for &v in collapse {
        if v >= n {
            return Err(Error::VertexOutOfRange { v, n });
        }
        collapsed[v] = true;
    }
    let kept: Vec<usize> = (0..n).filter(|&v| !collapsed[v]).collect();
    let index: Vec<usize> = {
        let mut idx = vec![usize::MAX; n];
        for (i, &v) in kept.iter().enumerate() {
            idx[v] = i;
        }
        idx
    };
    let k = kept.len();
    let mut m = vec![vec![BigInt::from(0); k]; k];
    for (i, &v) in kept.iter().enumerate() {
        for &w in g.arcs(v) {
            let w = w as usize;
            if w == v {
                continue;
            }
            m[i][i] += 1;
            if !collapsed[w] {
                m[i][index[w]] -= 1;
            }
        }
    }
    let det = bareiss_determinant(m);
    match det.sign() {
        Sign::Minus => Err(Error::InvalidParameter(
            "matrix-tree determinant came out negative".into(),
        )),
        _ => Ok(det.magnitude().clone()),
    }
}

/// Number of recurrent configurations of the driven chain: the spanning
/// trees of the graph with all sinks identified.
pub fn recurrent_count(g: &SinkedGraph) -> Result<BigUint> {
    spanning_tree_count(&g.graph, g.sinks())
}

/// Fraction-free (Bareiss) elimination; every division is exact.
fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut sign = 1i32;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k].sign() == Sign::NoSign {
            let Some(swap) = (k + 1..n).find(|&r| m[r][k].sign() != Sign::NoSign) else {
                return BigInt::from(0);
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::from(0);
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Largest edge count [`unicyclic_count`] accepts by default. The walk
/// visits every subset of `num_vertices` of the edges, so this bounds the
/// work at roughly `C(26, 13)`.
pub const UNICYCLIC_EDGE_BUDGET: usize = 26;

/// Number of spanning connected subgraphs with exactly one cycle.
pub fn unicyclic_count(g: &MultiGraph) -> Result<BigUint> {
    unicyclic_count_with_budget(g, UNICYCLIC_EDGE_BUDGET)
}

pub fn unicyclic_count_with_budget(g: &MultiGraph, max_edges: usize) -> Result<BigUint> {
    let edges = edge_instances(g);
    if edges.len() > max_edges {
        return Err(Error::EdgeBudget {
            budget: max_edges,
            edges: edges.len(),
        });
    }
    let n = g.num_vertices();
    // A connected spanning subgraph with as many edges as vertices has
    // exactly one independent cycle, so cardinality plus connectivity is
    // the whole test.
    Ok(BigUint::from(count_connected_subsets(&edges, n, n)))
}

/// Number of spanning trees by direct subset enumeration; the slow twin
/// of [`spanning_tree_count`] with an empty collapse step.
pub fn spanning_tree_count_by_enumeration(g: &MultiGraph, max_edges: usize) -> Result<BigUint> {
    let edges = edge_instances(g);
    if edges.len() > max_edges {
        return Err(Error::EdgeBudget {
            budget: max_edges,
            edges: edges.len(),
        });
    }
    let n = g.num_vertices();
    Ok(BigUint::from(count_connected_subsets(&edges, n, n - 1)))
}

/// Undirected edge instances, one entry per parallel copy; a loop appears
/// once per loop edge.
fn edge_instances(g: &MultiGraph) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(g.num_edges());
    for v in 0..g.num_vertices() {
        let arcs = g.arcs(v);
        let mut i = 0;
        while i < arcs.len() {
            let w = arcs[i];
            let mut j = i;
            while j < arcs.len() && arcs[j] == w {
                j += 1;
            }
            let copies = if (w as usize) == v {
                (j - i) / 2
            } else if (w as usize) > v {
                j - i
            } else {
                0
            };
            for _ in 0..copies {
                out.push((v as u32, w));
            }
            i = j;
        }
    }
    out
}

fn count_connected_subsets(edges: &[(u32, u32)], n: usize, size: usize) -> u64 {
    let m = edges.len();
    if size > m || size == 0 || n == 0 {
        return 0;
    }
    let mut parent = vec![0u32; n];
    let mut count = 0u64;
    let mut subset: u64 = (1 << size) - 1;
    let limit: u64 = 1 << m;
    while subset < limit {
        for (v, p) in parent.iter_mut().enumerate() {
            *p = v as u32;
        }
        let mut components = n;
        let mut bits = subset;
        while bits != 0 {
            let e = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let (v, w) = edges[e];
            let (rv, rw) = (find(&mut parent, v), find(&mut parent, w));
            if rv != rw {
                parent[rv as usize] = rw;
                components -= 1;
            }
        }
        if components == 1 {
            count += 1;
        }
        let c = subset & subset.wrapping_neg();
        let r = subset + c;
        subset = (((r ^ subset) >> 2) / c) | r;
    }
    count
}

fn find(parent: &mut [u32], mut v: u32) -> u32 {
    while parent[v as usize] != v {
        parent[v as usize] = parent[parent[v as usize] as usize];
        v = parent[v as usize];
    }
    v
}
