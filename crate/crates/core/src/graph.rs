//! Multigraph storage and the graph families under study.
//!
//! Graphs are undirected multigraphs with loops. Storage is a compressed
//! arc list: `arcs(v)` holds one entry per particle sent out when `v`
//! topples once, so an edge of multiplicity `m` to a neighbor appears `m`
//! times and a loop appears twice (a loop adds 2 to the degree and returns
//! both particles to its endpoint). With that convention the degree of `v`
//! is exactly `arcs(v).len()` and toppling code never special-cases loops.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::rng::RngStream;
use crate::{Error, Result};

/// Access to a graph's toppling structure.
///
/// Implemented by [`MultiGraph`] and by implicit families ([`Torus`],
/// [`Complete`]) whose neighbor lists are computed on the fly instead of
/// materialized.
pub trait Topology: Sync {
    fn num_vertices(&self) -> usize;

    /// Degree of `v`, counting edge multiplicities and 2 per loop.
    fn degree(&self, v: usize) -> u64;

    /// Calls `f` once per arc out of `v`: one call per particle emitted by a
    /// single toppling of `v`. Loops invoke `f(v)` twice per loop edge.
    fn for_each_arc<F: FnMut(usize)>(&self, v: usize, f: F);
}

/// Undirected multigraph in compressed arc-list form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    offsets: Vec<usize>,
    arcs: Vec<u32>,
}

impl MultiGraph {
    /// Number of vertices.
    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of edges counted with multiplicity (loops count once).
    pub fn num_edges(&self) -> usize {
        self.arcs.len() / 2
    }

    /// Arc destinations out of `v` (sorted ascending).
    pub fn arcs(&self, v: usize) -> &[u32] {
        &self.arcs[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Edge multiplicity between `v` and `w`; for `v == w` this is the
    /// number of loop edges, not the arc count.
    pub fn multiplicity(&self, v: usize, w: usize) -> u64 {
        let arcs = self.arcs(v).iter().filter(|&&a| a as usize == w).count() as u64;
        if v == w {
            arcs / 2
        } else {
            arcs
        }
    }

    /// True if the graph is connected (the empty graph counts as connected).
    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut visited = 1usize;
        while let Some(v) = stack.pop() {
            for &w in self.arcs(v) {
                let w = w as usize;
                if !seen[w] {
                    seen[w] = true;
                    visited += 1;
                    stack.push(w);
                }
            }
        }
        visited == n
    }

    /// Serializes to the plain-text exchange format: a `n <count>` header,
    /// then one `v w mult` line per distinct edge with `v <= w` in
    /// lexicographic order (for loops, `mult` is the number of loop edges).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n {}", self.num_vertices());
        for (v, w, mult) in self.distinct_edges() {
            let _ = writeln!(out, "{} {} {}", v, w, mult);
        }
        out
    }

    /// Parses the format written by [`MultiGraph::to_text`].
    pub fn from_text(text: &str) -> Result<MultiGraph> {
        let (graph, sinks) = parse_text(text)?;
        if sinks.is_some() {
            return Err(Error::Parse(
                "unexpected sinks line in plain multigraph".into(),
            ));
        }
        Ok(graph)
    }

    /// Distinct edges `(v, w, mult)` with `v <= w`, sorted; loop `mult` is
    /// the loop-edge count.
    pub fn distinct_edges(&self) -> Vec<(usize, usize, u64)> {
        let mut edges = Vec::new();
        for v in 0..self.num_vertices() {
            let slice = self.arcs(v);
            let mut i = 0;
            while i < slice.len() {
                let w = slice[i] as usize;
                let mut count = 0u64;
                while i < slice.len() && slice[i] as usize == w {
                    count += 1;
                    i += 1;
                }
                if w > v {
                    edges.push((v, w, count));
                } else if w == v {
                    debug_assert!(count.is_multiple_of(2));
                    edges.push((v, v, count / 2));
                }
            }
        }
        edges
    }

    fn from_sorted_adjacency(adjacency: Vec<Vec<u32>>) -> MultiGraph {
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        offsets.push(0usize);
        let total: usize = adjacency.iter().map(Vec::len).sum();
        let mut arcs = Vec::with_capacity(total);
        for list in adjacency {
            arcs.extend_from_slice(&list);
            offsets.push(arcs.len());
        }
        MultiGraph { offsets, arcs }
    }
}

impl Topology for MultiGraph {
    fn num_vertices(&self) -> usize {
        self.num_vertices()
    }

    fn degree(&self, v: usize) -> u64 {
        (self.offsets[v + 1] - self.offsets[v]) as u64
    }

    fn for_each_arc<F: FnMut(usize)>(&self, v: usize, mut f: F) {
        for &w in self.arcs(v) {
            f(w as usize);
        }
    }
}

/// Incremental constructor for small and medium graphs.
#[derive(Debug)]
pub struct MultiGraphBuilder {
    n: usize,
    // (v, w) with v <= w; value = multiplicity (loop edges for v == w).
    edges: BTreeMap<(u32, u32), u64>,
}

impl MultiGraphBuilder {
    pub fn new(n: usize) -> MultiGraphBuilder {
        MultiGraphBuilder {
            n,
            edges: BTreeMap::new(),
        }
    }

    /// Adds `mult` parallel edges between distinct vertices `v` and `w`.
    pub fn add_edge(&mut self, v: usize, w: usize, mult: u64) -> Result<&mut Self> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { v, n: self.n });
        }
        if w >= self.n {
            return Err(Error::VertexOutOfRange { v: w, n: self.n });
        }
        if v == w {
            return self.add_loop(v, mult);
        }
        if mult == 0 {
            return Err(Error::InvalidParameter("edge multiplicity 0".into()));
        }
        let key = (v.min(w) as u32, v.max(w) as u32);
        *self.edges.entry(key).or_insert(0) += mult;
        Ok(self)
    }

    /// Adds `count` loop edges at `v` (each contributes 2 to the degree).
    pub fn add_loop(&mut self, v: usize, count: u64) -> Result<&mut Self> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { v, n: self.n });
        }
        if count == 0 {
            return Err(Error::InvalidParameter("loop count 0".into()));
        }
        *self.edges.entry((v as u32, v as u32)).or_insert(0) += count;
        Ok(self)
    }

    pub fn build(self) -> MultiGraph {
        let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); self.n];
        for (&(v, w), &mult) in &self.edges {
            if v == w {
                for _ in 0..2 * mult {
                    adjacency[v as usize].push(v);
                }
            } else {
                for _ in 0..mult {
                    adjacency[v as usize].push(w);
                    adjacency[w as usize].push(v);
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        MultiGraph::from_sorted_adjacency(adjacency)
    }
}

/// A connected multigraph with a nonempty set of absorbing sink vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkedGraph {
    pub graph: MultiGraph,
    sinks: Vec<usize>,
    is_sink: Vec<bool>,
}

impl SinkedGraph {
    pub fn new(graph: MultiGraph, sinks: Vec<usize>) -> Result<SinkedGraph> {
        let n = graph.num_vertices();
        let mut sorted: Vec<usize> = sinks;
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::InvalidParameter("sink set is empty".into()));
        }
        if let Some(&v) = sorted.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { v, n });
        }
        if sorted.len() == n {
            return Err(Error::InvalidParameter(
                "every vertex is a sink; nothing to stabilize".into(),
            ));
        }
        if !graph.is_connected() {
            return Err(Error::InvalidParameter("graph is not connected".into()));
        }
        let mut is_sink = vec![false; n];
        for &v in &sorted {
            is_sink[v] = true;
        }
        Ok(SinkedGraph {
            graph,
            sinks: sorted,
            is_sink,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    /// Number of non-sink vertices (the set usually written V').
    pub fn num_nonsink(&self) -> usize {
        self.num_vertices() - self.sinks.len()
    }

    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }

    pub fn is_sink(&self, v: usize) -> bool {
        self.is_sink[v]
    }

    pub fn sink_mask(&self) -> &[bool] {
        &self.is_sink
    }

    /// Non-sink vertices in ascending order.
    pub fn nonsink_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_vertices()).filter(move |&v| !self.is_sink[v])
    }

    /// Text format of the underlying graph plus a final `sinks ...` line.
    pub fn to_text(&self) -> String {
        let mut out = self.graph.to_text();
        out.push_str("sinks");
        for &s in &self.sinks {
            let _ = write!(out, " {}", s);
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<SinkedGraph> {
        let (graph, sinks) = parse_text(text)?;
        let sinks =
            sinks.ok_or_else(|| Error::Parse("missing sinks line in sinked graph".into()))?;
        SinkedGraph::new(graph, sinks)
    }
}

fn parse_text(text: &str) -> Result<(MultiGraph, Option<Vec<usize>>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
    let n: usize = match header.strip_prefix("n ") {
        Some(rest) => rest
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex count {rest:?}")))?,
        None => return Err(Error::Parse("first line must be `n <count>`".into())),
    };
    let mut builder = MultiGraphBuilder::new(n);
    let mut sinks = None;
    let mut seen: Option<(u32, u32)> = None;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("sinks") {
            let parsed: std::result::Result<Vec<usize>, _> =
                rest.split_whitespace().map(str::parse).collect();
            sinks = Some(parsed.map_err(|_| Error::Parse(format!("bad sinks line {line:?}")))?);
            continue;
        }
        if sinks.is_some() {
            return Err(Error::Parse("edge line after sinks line".into()));
        }
        let mut fields = line.split_whitespace();
        let v: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad edge line {line:?}")))?;
        let w: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad edge line {line:?}")))?;
        let mult: u64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad edge line {line:?}")))?;
        if fields.next().is_some() {
            return Err(Error::Parse(format!("trailing fields in {line:?}")));
        }
        if v > w {
            return Err(Error::Parse(format!("edge {v} {w} not in v <= w order")));
        }
        let key = (v as u32, w as u32);
        if let Some(prev) = seen {
            if key <= prev {
                return Err(Error::Parse(format!("edge {v} {w} out of order")));
            }
        }
        seen = Some(key);
        if v == w {
            builder.add_loop(v, mult)?;
        } else {
            builder.add_edge(v, w, mult)?;
        }
    }
    Ok((builder.build(), sinks))
}

/// Square torus lattice with implicit 4-neighbor arcs; never materializes
/// edge lists, so threshold runs on large lattices stay allocation-free.
#[derive(Debug, Clone, Copy)]
pub struct Torus {
    side: usize,
}

impl Torus {
    pub fn new(side: usize) -> Result<Torus> {
        if side == 0 {
            return Err(Error::InvalidParameter("torus side must be >= 1".into()));
        }
        Ok(Torus { side })
    }

    pub fn side(&self) -> usize {
        self.side
    }
}

impl Topology for Torus {
    fn num_vertices(&self) -> usize {
        self.side * self.side
    }

    fn degree(&self, _v: usize) -> u64 {
        4
    }

    #[inline]
    fn for_each_arc<F: FnMut(usize)>(&self, v: usize, mut f: F) {
        let n = self.side;
        let nn = n * n;
        let r = v / n;
        let c = v % n;
        // Row wrap is +-n mod n^2; column wrap stays within the row.
        f(if v >= n { v - n } else { v + nn - n });
        f(if v + n < nn { v + n } else { v + n - nn });
        f(if c > 0 { v - 1 } else { v + n - 1 });
        f(if c + 1 < n { v + 1 } else { v + 1 - n });
        let _ = r;
    }
}

/// Complete graph with implicit all-others arcs.
#[derive(Debug, Clone, Copy)]
pub struct Complete {
    n: usize,
}

impl Complete {
    pub fn new(n: usize) -> Result<Complete> {
        if n < 2 {
            return Err(Error::InvalidParameter(
                "complete graph needs >= 2 vertices".into(),
            ));
        }
        Ok(Complete { n })
    }
}

impl Topology for Complete {
    fn num_vertices(&self) -> usize {
        self.n
    }

    fn degree(&self, _v: usize) -> u64 {
        (self.n - 1) as u64
    }

    #[inline]
    fn for_each_arc<F: FnMut(usize)>(&self, v: usize, mut f: F) {
        for w in 0..self.n {
            if w != v {
                f(w);
            }
        }
    }
}

/// Cycle on `n` vertices (vertices 0..n around the ring). Degenerate cases
/// follow the torus conventions: n = 1 is a single vertex with one loop,
/// n = 2 is a doubled edge; every vertex has degree 2.
pub fn cycle(n: usize) -> Result<MultiGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("cycle needs >= 1 vertex".into()));
    }
    let mut b = MultiGraphBuilder::new(n);
    if n == 1 {
        b.add_loop(0, 1)?;
    } else if n == 2 {
        b.add_edge(0, 1, 2)?;
    } else {
        for v in 0..n {
            b.add_edge(v, (v + 1) % n, 1)?;
        }
    }
    Ok(b.build())
}

/// Cycle with vertex 0 as the sink.
pub fn cycle_with_sink(n: usize) -> Result<SinkedGraph> {
    SinkedGraph::new(cycle(n)?, vec![0])
}

/// Bracelet: the cycle with every edge doubled, so every vertex has degree 4.
pub fn bracelet(n: usize) -> Result<MultiGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("bracelet needs >= 1 vertex".into()));
    }
    let mut b = MultiGraphBuilder::new(n);
    if n == 1 {
        b.add_loop(0, 2)?;
    } else if n == 2 {
        b.add_edge(0, 1, 4)?;
    } else {
        for v in 0..n {
            b.add_edge(v, (v + 1) % n, 2)?;
        }
    }
    Ok(b.build())
}

/// Bracelet with vertex 0 as the sink.
pub fn bracelet_with_sink(n: usize) -> Result<SinkedGraph> {
    SinkedGraph::new(bracelet(n)?, vec![0])
}

/// Flower with `n` two-vertex petals: center 0 of degree 2n, petal `k`
/// occupying vertices 2k+1 and 2k+2, each petal vertex of degree 2.
pub fn flower(n: usize) -> Result<MultiGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("flower needs >= 1 petal".into()));
    }
    let mut b = MultiGraphBuilder::new(2 * n + 1);
    for k in 0..n {
        let x = 2 * k + 1;
        let y = 2 * k + 2;
        b.add_edge(0, x, 1)?;
        b.add_edge(0, y, 1)?;
        b.add_edge(x, y, 1)?;
    }
    Ok(b.build())
}

/// Flower with petal 0 (vertices 1 and 2) as the sink.
pub fn flower_with_sink(n: usize) -> Result<SinkedGraph> {
    SinkedGraph::new(flower(n)?, vec![1, 2])
}

/// Square torus as an explicit multigraph, row-major numbering `r*n + c`.
/// n = 1 yields two loops (degree 4); n = 2 yields doubled edges.
pub fn torus(n: usize) -> Result<MultiGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("torus side must be >= 1".into()));
    }
    let mut b = MultiGraphBuilder::new(n * n);
    if n == 1 {
        b.add_loop(0, 2)?;
        return Ok(b.build());
    }
    for r in 0..n {
        for c in 0..n {
            let v = r * n + c;
            let right = r * n + (c + 1) % n;
            let down = ((r + 1) % n) * n + c;
            let mult = if n == 2 { 2 } else { 1 };
            if n == 2 {
                // With side 2 both horizontal (resp. vertical) neighbors
                // coincide, so only emit each doubled edge once.
                if c == 0 {
                    b.add_edge(v, right, mult)?;
                }
                if r == 0 {
                    b.add_edge(v, down, mult)?;
                }
            } else {
                b.add_edge(v, right, mult)?;
                b.add_edge(v, down, mult)?;
            }
        }
    }
    Ok(b.build())
}

/// Complete graph on `n` vertices as an explicit multigraph.
pub fn complete(n: usize) -> Result<MultiGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "complete graph needs >= 2 vertices".into(),
        ));
    }
    let mut b = MultiGraphBuilder::new(n);
    for v in 0..n {
        for w in v + 1..n {
            b.add_edge(v, w, 1)?;
        }
    }
    Ok(b.build())
}

/// Complete graph with vertex 0 as the sink.
pub fn complete_with_sink(n: usize) -> Result<SinkedGraph> {
    SinkedGraph::new(complete(n)?, vec![0])
}

/// 2 x n ladder: rung `i` is vertices (2i, 2i+1) joined by a rung edge;
/// consecutive rungs are joined by two rails. Interior vertices have
/// degree 3, end-rung vertices degree 2.
pub fn ladder(n: usize) -> Result<MultiGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("ladder needs >= 1 rung".into()));
    }
    let mut b = MultiGraphBuilder::new(2 * n);
    for i in 0..n {
        b.add_edge(2 * i, 2 * i + 1, 1)?;
        if i + 1 < n {
            b.add_edge(2 * i, 2 * i + 2, 1)?;
            b.add_edge(2 * i + 1, 2 * i + 3, 1)?;
        }
    }
    Ok(b.build())
}

/// Ladder with both end rungs (all four of their vertices) as sinks.
pub fn ladder_with_sinks(n: usize) -> Result<SinkedGraph> {
    if n < 3 {
        return Err(Error::InvalidParameter(
            "sinked ladder needs >= 3 rungs".into(),
        ));
    }
    SinkedGraph::new(ladder(n)?, vec![0, 1, 2 * n - 2, 2 * n - 1])
}

/// Lollipop: complete graph on vertices 0..n with a pendant path of n edges
/// attached at vertex n-1; path vertices are n..2n, so the graph has 2n
/// vertices and the far path end is 2n-1.
pub fn lollipop(n: usize) -> Result<MultiGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter("lollipop needs n >= 2".into()));
    }
    let mut b = MultiGraphBuilder::new(2 * n);
    for v in 0..n {
        for w in v + 1..n {
            b.add_edge(v, w, 1)?;
        }
    }
    b.add_edge(n - 1, n, 1)?;
    for v in n..2 * n - 1 {
        b.add_edge(v, v + 1, 1)?;
    }
    Ok(b.build())
}

/// Lollipop with the far path end as the sink.
pub fn lollipop_with_sink(n: usize) -> Result<SinkedGraph> {
    let g = lollipop(n)?;
    let sink = g.num_vertices() - 1;
    SinkedGraph::new(g, vec![sink])
}

/// Wired regular tree: the depth-`depth` rooted (q+1)-regular tree with all
/// depth-`depth` vertices collapsed into a single sink (the last index).
/// Root is vertex 0; levels are numbered breadth-first. Every non-sink
/// vertex has degree q + 1.
pub fn wired_tree(q: usize, depth: usize) -> Result<SinkedGraph> {
    if q < 1 {
        return Err(Error::InvalidParameter("wired tree needs q >= 1".into()));
    }
    if depth < 1 {
        return Err(Error::InvalidParameter(
            "wired tree needs depth >= 1".into(),
        ));
    }
    // Count internal vertices level by level.
    let mut level_sizes = vec![1usize];
    for level in 1..depth {
        let prev = level_sizes[level - 1];
        let children_per = if level == 1 { q + 1 } else { q };
        level_sizes.push(prev * children_per);
    }
    let internal: usize = level_sizes.iter().sum();
    let sink = internal;
    let mut b = MultiGraphBuilder::new(internal + 1);
    let mut next_child = 1usize;
    let mut level_start = 0usize;
    for (level, &size) in level_sizes.iter().enumerate() {
        let children_per = if level == 0 { q + 1 } else { q };
        for v in level_start..level_start + size {
            if level + 1 < depth {
                for _ in 0..children_per {
                    b.add_edge(v, next_child, 1)?;
                    next_child += 1;
                }
            } else {
                // Children live at the collapsed boundary.
                b.add_edge(v, sink, children_per as u64)?;
            }
        }
        level_start += size;
    }
    SinkedGraph::new(b.build(), vec![sink])
}

/// Uniform random connected (q+1)-regular multigraph on `n` vertices
/// (n even): a fixed perfect matching pairing 2i with 2i+1, plus q
/// independent uniform matchings, each chosen so its union with the fixed
/// matching is a single n-cycle. Sampling picks a uniform cyclic
/// permutation pi of the n/2 pairs and wires 2i+1 to 2*pi(i); there are
/// (n/2 - 1)! such matchings.
pub fn random_regular(q: usize, n: usize, rng: &mut RngStream) -> Result<MultiGraph> {
    if q < 1 {
        return Err(Error::InvalidParameter("random regular needs q >= 1".into()));
    }
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(
            "random regular needs even n >= 2".into(),
        ));
    }
    let pairs = n / 2;
    let degree = q + 1;
    let mut adjacency: Vec<u32> = vec![0; n * degree];
    for i in 0..pairs {
        adjacency[(2 * i) * degree] = (2 * i + 1) as u32;
        adjacency[(2 * i + 1) * degree] = (2 * i) as u32;
    }
    // One uniform cyclic permutation per extra matching: fix pi(0) chain and
    // shuffle the remaining pairs into a random order.
    let mut order: Vec<u32> = (1..pairs as u32).collect();
    for (slot, matching) in (1..=q).enumerate() {
        for k in (1..order.len()).rev() {
            let j = rng.uniform_below((k + 1) as u64) as usize;
            order.swap(k, j);
        }
        // Cycle 0 -> order[0] -> order[1] -> ... -> 0.
        let mut from = 0u32;
        for step in 0..pairs {
            let to = if step + 1 < pairs { order[step] } else { 0 };
            let a = 2 * from as usize + 1; // odd vertex of pair `from`
            let b = 2 * to as usize; // even vertex of pair `to`
            adjacency[a * degree + 1 + slot] = b as u32;
            adjacency[b * degree + 1 + slot] = a as u32;
            from = to;
        }
        let _ = matching;
    }
    let mut offsets = Vec::with_capacity(n + 1);
    for v in 0..=n {
        offsets.push(v * degree);
    }
    for v in 0..n {
        adjacency[v * degree..(v + 1) * degree].sort_unstable();
    }
    Ok(MultiGraph {
        offsets,
        arcs: adjacency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(g: &MultiGraph) -> Vec<u64> {
        (0..g.num_vertices()).map(|v| g.degree(v)).collect()
    }

    #[test]
    fn cycle_shapes() {
        let g = cycle(5).unwrap();
        assert_eq!(g.num_vertices(), 5);
        assert_eq!(g.num_edges(), 5);
        assert!(degrees(&g).iter().all(|&d| d == 2));
        assert!(g.is_connected());

        let g1 = cycle(1).unwrap();
        assert_eq!(g1.degree(0), 2);
        assert_eq!(g1.multiplicity(0, 0), 1);

        let g2 = cycle(2).unwrap();
        assert_eq!(g2.degree(0), 2);
        assert_eq!(g2.multiplicity(0, 1), 2);
    }

    #[test]
    fn bracelet_doubles_the_cycle() {
        let g = bracelet(6).unwrap();
        assert!(degrees(&g).iter().all(|&d| d == 4));
        assert_eq!(g.multiplicity(0, 1), 2);
        assert_eq!(g.multiplicity(0, 5), 2);
        assert_eq!(g.multiplicity(0, 2), 0);
    }

    #[test]
    fn flower_shapes() {
        let g = flower(3).unwrap();
        assert_eq!(g.num_vertices(), 7);
        assert_eq!(g.degree(0), 6);
        for v in 1..7 {
            assert_eq!(g.degree(v), 2);
        }
        assert_eq!(g.multiplicity(1, 2), 1);
        assert_eq!(g.multiplicity(0, 1), 1);
        let s = flower_with_sink(3).unwrap();
        assert_eq!(s.sinks(), &[1, 2]);
        assert_eq!(s.num_nonsink(), 5);
    }

    #[test]
    fn torus_shapes_including_degenerate_sides() {
        let g3 = torus(3).unwrap();
        assert_eq!(g3.num_vertices(), 9);
        assert_eq!(g3.num_edges(), 18);
        assert!(degrees(&g3).iter().all(|&d| d == 4));

        let g2 = torus(2).unwrap();
        assert!(degrees(&g2).iter().all(|&d| d == 4));
        assert_eq!(g2.multiplicity(0, 1), 2);
        assert_eq!(g2.multiplicity(0, 2), 2);
        assert_eq!(g2.multiplicity(0, 3), 0);

        let g1 = torus(1).unwrap();
        assert_eq!(g1.degree(0), 4);
        assert_eq!(g1.multiplicity(0, 0), 2);
    }

    #[test]
    fn implicit_torus_matches_explicit() {
        for side in [1usize, 2, 3, 5] {
            let implicit = Torus::new(side).unwrap();
            let explicit = torus(side).unwrap();
            assert_eq!(implicit.num_vertices(), explicit.num_vertices());
            for v in 0..explicit.num_vertices() {
                let mut a = Vec::new();
                implicit.for_each_arc(v, |w| a.push(w));
                a.sort_unstable();
                let b: Vec<usize> = explicit.arcs(v).iter().map(|&w| w as usize).collect();
                assert_eq!(a, b, "torus side {side} vertex {v}");
            }
        }
    }

    #[test]
    fn implicit_complete_matches_explicit() {
        let implicit = Complete::new(6).unwrap();
        let explicit = complete(6).unwrap();
        for v in 0..6 {
            let mut a = Vec::new();
            implicit.for_each_arc(v, |w| a.push(w));
            let b: Vec<usize> = explicit.arcs(v).iter().map(|&w| w as usize).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ladder_shapes() {
        let g = ladder(4).unwrap();
        assert_eq!(g.num_vertices(), 8);
        for v in [2, 3, 4, 5] {
            assert_eq!(g.degree(v), 3);
        }
        for v in [0, 1, 6, 7] {
            assert_eq!(g.degree(v), 2);
        }
        let s = ladder_with_sinks(3).unwrap();
        assert_eq!(s.sinks(), &[0, 1, 4, 5]);
        let interior: Vec<usize> = s.nonsink_vertices().collect();
        assert_eq!(interior, vec![2, 3]);

        let s5 = ladder_with_sinks(5).unwrap();
        assert_eq!(s5.sinks().len(), 4);
        assert_eq!(s5.num_nonsink(), 6);
    }

    #[test]
    fn lollipop_shapes() {
        let g = lollipop(3).unwrap();
        assert_eq!(g.num_vertices(), 6);
        assert_eq!(g.degree(2), 3); // attachment vertex
        assert_eq!(g.degree(3), 2);
        assert_eq!(g.degree(4), 2);
        assert_eq!(g.degree(5), 1);
        let s = lollipop_with_sink(3).unwrap();
        assert_eq!(s.sinks(), &[5]);
    }

    #[test]
    fn wired_tree_shapes() {
        let t = wired_tree(2, 1).unwrap();
        assert_eq!(t.num_vertices(), 2);
        assert_eq!(t.graph.multiplicity(0, 1), 3);
        assert_eq!(t.graph.degree(0), 3);

        let t2 = wired_tree(2, 2).unwrap();
        assert_eq!(t2.num_vertices(), 5);
        assert_eq!(t2.graph.degree(0), 3);
        for v in 1..4 {
            assert_eq!(t2.graph.degree(v), 3);
            assert_eq!(t2.graph.multiplicity(v, 4), 2);
        }
        assert_eq!(t2.graph.degree(4), 6);

        let t3 = wired_tree(3, 3).unwrap();
        // 1 + 4 + 12 internal vertices plus the sink.
        assert_eq!(t3.num_vertices(), 18);
        for v in t3.nonsink_vertices() {
            assert_eq!(t3.graph.degree(v), 4);
        }
    }

    #[test]
    fn complete_and_sink() {
        let s = complete_with_sink(4).unwrap();
        assert_eq!(s.sinks(), &[0]);
        assert_eq!(s.graph.num_edges(), 6);
    }

    #[test]
    fn random_regular_is_regular_and_connected() {
        let mut rng = RngStream::new(7, 0);
        for q in 1..=4 {
            let g = random_regular(q, 32, &mut rng).unwrap();
            assert_eq!(g.num_vertices(), 32);
            assert!((0..32).all(|v| g.degree(v) == (q + 1) as u64));
            assert!(g.is_connected());
        }
    }

    #[test]
    fn random_regular_smallest_case_is_the_unique_matching() {
        // n = 4, q = 1: the only valid extra matching is {(1,2),(3,0)}.
        let mut rng = RngStream::new(123, 5);
        let g = random_regular(1, 4, &mut rng).unwrap();
        assert_eq!(g.multiplicity(0, 1), 1);
        assert_eq!(g.multiplicity(2, 3), 1);
        assert_eq!(g.multiplicity(1, 2), 1);
        assert_eq!(g.multiplicity(0, 3), 1);
    }

    #[test]
    fn random_regular_matchings_are_uniform() {
        // n = 6, q = 1: two valid matchings, each should appear about half
        // the time. The matching is identified by the partner of vertex 1.
        let trials = 20_000;
        let mut hits = [0u32; 2];
        for t in 0..trials {
            let mut rng = RngStream::new(42, t);
            let g = random_regular(1, 6, &mut rng).unwrap();
            let partner = *g
                .arcs(1)
                .iter()
                .find(|&&w| w != 0)
                .expect("vertex 1 has a matching partner");
            match partner {
                2 => hits[0] += 1,
                4 => hits[1] += 1,
                other => panic!("unexpected matching partner {other}"),
            }
        }
        for h in hits {
            let freq = f64::from(h) / f64::from(trials as u32);
            assert!((freq - 0.5).abs() < 0.02, "matching frequency {freq}");
        }
    }

    #[test]
    fn text_round_trip_multigraph() {
        let g = flower(2).unwrap();
        let text = g.to_text();
        let back = MultiGraph::from_text(&text).unwrap();
        assert_eq!(g, back);
        assert_eq!(text, back.to_text());
    }

    #[test]
    fn text_round_trip_with_loops_and_sinks() {
        let mut b = MultiGraphBuilder::new(3);
        b.add_edge(0, 1, 2).unwrap();
        b.add_edge(1, 2, 1).unwrap();
        b.add_loop(2, 3).unwrap();
        let s = SinkedGraph::new(b.build(), vec![0]).unwrap();
        let text = s.to_text();
        let back = SinkedGraph::from_text(&text).unwrap();
        assert_eq!(s, back);
        assert_eq!(text, back.to_text());
        assert_eq!(back.graph.multiplicity(2, 2), 3);
        assert_eq!(back.graph.degree(2), 7);
    }

    #[test]
    fn text_rejects_malformed_input() {
        assert!(MultiGraph::from_text("m 3\n").is_err());
        assert!(MultiGraph::from_text("n 3\n1 0 1\n").is_err());
        assert!(MultiGraph::from_text("n 3\n0 1 1\n0 1 2\n").is_err());
        assert!(MultiGraph::from_text("n 2\n0 1 1\nsinks 0\n").is_err());
        assert!(SinkedGraph::from_text("n 2\n0 1 1\n").is_err());
    }

    #[test]
    fn sink_validation() {
        let g = cycle(4).unwrap();
        assert!(SinkedGraph::new(g.clone(), vec![]).is_err());
        assert!(SinkedGraph::new(g.clone(), vec![4]).is_err());
        assert!(SinkedGraph::new(g.clone(), vec![0, 1, 2, 3]).is_err());
        let s = SinkedGraph::new(g, vec![2, 0, 2]).unwrap();
        assert_eq!(s.sinks(), &[0, 2]);
        assert_eq!(s.num_nonsink(), 2);
    }

    #[test]
    fn disconnected_graphs_are_rejected_as_sinked() {
        let mut b = MultiGraphBuilder::new(4);
        b.add_edge(0, 1, 1).unwrap();
        b.add_edge(2, 3, 1).unwrap();
        let g = b.build();
        assert!(!g.is_connected());
        assert!(SinkedGraph::new(g, vec![0]).is_err());
    }
}
