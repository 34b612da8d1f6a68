//! Dynamic graph representation shared by every structure in the crate.
//!
//! Vertex ids are dense integers and deletions tombstone rather than compact,
//! so ids stay stable across a run. Lengths are positive integers; the
//! quarter-length special edges of the extended light graph exist only inside
//! the WSES module, which works in quarter units.

use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::BigRational;
use thiserror::Error;

use crate::params::Rational;

pub type VertexId = usize;
pub type EdgeId = usize;

pub const INF: u64 = u64::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex {0} is deleted or out of range")]
    StaleVertex(VertexId),
    #[error("edge {0} is deleted or out of range")]
    StaleEdge(EdgeId),
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub len: u64,
    pub alive: bool,
}

impl Edge {
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone)]
pub struct DynamicGraph {
    alive: Vec<bool>,
    adj: Vec<Vec<(VertexId, EdgeId)>>,
    edges: Vec<Edge>,
    deg: Vec<usize>,
    live_vertices: usize,
    live_edges: usize,
}

impl DynamicGraph {
    pub fn new(n: usize) -> Self {
        DynamicGraph {
            alive: vec![true; n],
            adj: vec![Vec::new(); n],
            edges: Vec::new(),
            deg: vec![0; n],
            live_vertices: n,
            live_edges: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.alive.len()
    }

    pub fn live_vertices(&self) -> usize {
        self.live_vertices
    }

    pub fn live_edges(&self) -> usize {
        self.live_edges
    }

    pub fn is_alive(&self, v: VertexId) -> bool {
        v < self.alive.len() && self.alive[v]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.deg[v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.alive.len()).filter(move |&v| self.alive[v])
    }

    pub fn live_edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].alive)
    }

    /// Live neighbors of `v` with the connecting edge id. Dead entries are
    /// skipped lazily; `delete_vertex` compacts the lists it touches.
    pub fn neighbors<'a>(&'a self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId)> + 'a {
        self.adj[v]
            .iter()
            .copied()
            .filter(move |&(u, e)| self.edges[e].alive && self.alive[u])
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, len: u64) -> Result<EdgeId, GraphError> {
        if !self.is_alive(u) {
            return Err(GraphError::StaleVertex(u));
        }
        if !self.is_alive(v) {
            return Err(GraphError::StaleVertex(v));
        }
        let id = self.edges.len();
        self.edges.push(Edge { u, v, len, alive: true });
        self.adj[u].push((v, id));
        self.adj[v].push((u, id));
        self.deg[u] += 1;
        self.deg[v] += 1;
        self.live_edges += 1;
        Ok(id)
    }

    pub fn delete_edge(&mut self, e: EdgeId) -> Result<(), GraphError> {
        if e >= self.edges.len() || !self.edges[e].alive {
            return Err(GraphError::StaleEdge(e));
        }
        self.edges[e].alive = false;
        let (u, v) = (self.edges[e].u, self.edges[e].v);
        self.deg[u] -= 1;
        self.deg[v] -= 1;
        self.live_edges -= 1;
        Ok(())
    }

    /// Tombstone `v` and its incident live edges; returns the removed edge ids.
    pub fn delete_vertex(&mut self, v: VertexId) -> Result<Vec<EdgeId>, GraphError> {
        if !self.is_alive(v) {
            return Err(GraphError::StaleVertex(v));
        }
        self.alive[v] = false;
        self.live_vertices -= 1;
        let mut removed = Vec::new();
        let adj = std::mem::take(&mut self.adj[v]);
        for (u, e) in adj {
            if self.edges[e].alive {
                self.edges[e].alive = false;
                self.live_edges -= 1;
                self.deg[u] -= 1;
                removed.push(e);
            }
        }
        self.deg[v] = 0;
        Ok(removed)
    }

    /// Drop dead entries from an adjacency list (used by long-lived readers).
    pub fn compact_adjacency(&mut self, v: VertexId) {
        let edges = &self.edges;
        let alive = &self.alive;
        self.adj[v].retain(|&(u, e)| edges[e].alive && alive[u]);
    }
}

/// Class index of an edge length: `i` with `2^i <= len < 2^{i+1}`.
pub fn edge_class(len: u64) -> u32 {
    debug_assert!(len >= 1);
    63 - len.leading_zeros() as u32
}

/// Rescale for one distance scale: drop edges longer than `2D`, replace each
/// remaining length by `ceil(4 n len / (eps D))`, and work with the bound
/// `D' = ceil(4n/eps)` from then on. Returns the rescaled graph (same vertex
/// and edge ids; dropped edges are tombstoned) and `D'`.
pub fn rescale_lengths(g: &DynamicGraph, d: u64, eps: Rational) -> (DynamicGraph, u64) {
    let n = g.n() as u64;
    let four_n = 4 * n;
    let mut out = g.clone();
    let (p, q) = (*eps.numer() as u64, *eps.denom() as u64);
    // ceil(4 n len q / (p D))
    for e in 0..out.edges.len() {
        if !out.edges[e].alive {
            continue;
        }
        let len = out.edges[e].len;
        if len > 2 * d {
            out.delete_edge(e).unwrap();
            continue;
        }
        let num = (four_n as u128) * (len as u128) * (q as u128);
        let den = (p as u128) * (d as u128);
        out.edges[e].len = num.div_ceil(den) as u64;
    }
    let dp = ((four_n as u128 * q as u128).div_ceil(p as u128)) as u64;
    (out, dp)
}

/// Rational-length variant used by the flow oracle: lengths arrive as exact
/// rationals and come out as the integers `ceil(4 n len / (eps D))`.
pub fn rescale_rational_lengths(
    n: usize,
    edges: &[(VertexId, VertexId, BigRational)],
    d: &BigRational,
    eps: Rational,
) -> (DynamicGraph, u64) {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    let mut g = DynamicGraph::new(n);
    let four_n = BigRational::from_integer(BigInt::from(4 * n as i64));
    let eps_big = BigRational::new(BigInt::from(*eps.numer()), BigInt::from(*eps.denom()));
    let two_d = d * BigRational::from_integer(BigInt::from(2));
    for (u, v, len) in edges {
        if *len > two_d {
            continue;
        }
        let scaled = &four_n * len / (&eps_big * d);
        let int = scaled.ceil().to_integer().to_u64().unwrap_or(u64::MAX).max(1);
        g.add_edge(*u, *v, int).unwrap();
    }
    let dp_big = (&four_n / &eps_big).ceil().to_integer();
    (g, dp_big.to_u64().unwrap_or(u64::MAX))
}

/// Worklist low-degree pruning: partition `sub` into `(J1, J2)` so that every
/// vertex of `g[J2]` has at least `d` neighbors inside `J2` and `J2` is the
/// unique maximal such subset. FIFO by discovery.
pub fn degree_prune(
    g: &DynamicGraph,
    sub: &[VertexId],
    d: usize,
) -> (Vec<VertexId>, Vec<VertexId>) {
    let mut in_sub = vec![false; g.n()];
    for &v in sub {
        debug_assert!(g.is_alive(v));
        in_sub[v] = true;
    }
    let mut count = vec![0usize; g.n()];
    for &v in sub {
        count[v] = g.neighbors(v).filter(|&(u, _)| in_sub[u]).count();
    }
    let mut queue: VecDeque<VertexId> = sub.iter().copied().filter(|&v| count[v] < d).collect();
    let mut queued = vec![false; g.n()];
    for &v in &queue {
        queued[v] = true;
    }
    let mut j1 = Vec::new();
    while let Some(v) = queue.pop_front() {
        in_sub[v] = false;
        j1.push(v);
        for (u, _) in g.neighbors(v) {
            if in_sub[u] {
                count[u] -= 1;
                if count[u] < d && !queued[u] {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    let j2 = sub.iter().copied().filter(|&v| in_sub[v]).collect();
    (j1, j2)
}

/// Parse the graph file format: first line `n m`, then `m` lines `u v len`
/// with 0-indexed vertices and positive integer lengths. Lines starting with
/// `#` are comments.
pub fn load_graph(text: &str) -> Result<DynamicGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (header_no, header) = lines.next().ok_or(GraphError::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let mut it = header.split_whitespace();
    let parse_usize = |tok: Option<&str>, line: usize, what: &str| -> Result<usize, GraphError> {
        tok.ok_or(GraphError::Parse {
            line,
            msg: format!("missing {what}"),
        })?
        .parse()
        .map_err(|e| GraphError::Parse {
            line,
            msg: format!("bad {what}: {e}"),
        })
    };
    let n = parse_usize(it.next(), header_no + 1, "vertex count")?;
    let m = parse_usize(it.next(), header_no + 1, "edge count")?;
    let mut g = DynamicGraph::new(n);
    let mut seen: HashSet<(VertexId, VertexId)> = HashSet::new();
    let mut count = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let mut it = line.split_whitespace();
        let u = parse_usize(it.next(), lineno, "endpoint")?;
        let v = parse_usize(it.next(), lineno, "endpoint")?;
        let len: u64 = it
            .next()
            .ok_or(GraphError::Parse {
                line: lineno,
                msg: "missing length".into(),
            })?
            .parse()
            .map_err(|e| GraphError::Parse {
                line: lineno,
                msg: format!("bad length: {e}"),
            })?;
        if u >= n || v >= n {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("vertex out of range (n = {n})"),
            });
        }
        if u == v {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("self-loop at vertex {u}"),
            });
        }
        if len == 0 {
            return Err(GraphError::Parse {
                line: lineno,
                msg: "non-positive length".into(),
            });
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("duplicate edge {u}-{v}"),
            });
        }
        g.add_edge(u, v, len).unwrap();
        count += 1;
    }
    if count != m {
        return Err(GraphError::Parse {
            line: 1,
            msg: format!("header declares {m} edges, found {count}"),
        });
    }
    Ok(g)
}

/// Parse the capacity file: one line `v cap` per vertex, caps as `p/q` or an
/// integer, all positive.
pub fn load_capacities(text: &str, n: usize) -> Result<Vec<BigRational>, GraphError> {
    use num_bigint::BigInt;
    use num_traits::Zero;
    let mut caps = vec![BigRational::zero(); n];
    let mut seen = vec![false; n];
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let v: usize = it
            .next()
            .unwrap()
            .parse()
            .map_err(|e| GraphError::Parse {
                line: lineno,
                msg: format!("bad vertex: {e}"),
            })?;
        let cap_tok = it.next().ok_or(GraphError::Parse {
            line: lineno,
            msg: "missing capacity".into(),
        })?;
        let cap = crate::params::parse_rational(cap_tok).map_err(|msg| GraphError::Parse {
            line: lineno,
            msg,
        })?;
        if v >= n {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("vertex {v} out of range"),
            });
        }
        if cap <= crate::params::Rational::new(0, 1) {
            return Err(GraphError::Parse {
                line: lineno,
                msg: "capacity must be positive".into(),
            });
        }
        if seen[v] {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("duplicate capacity for vertex {v}"),
            });
        }
        seen[v] = true;
        caps[v] = BigRational::new(BigInt::from(*cap.numer()), BigInt::from(*cap.denom()));
    }
    for v in 0..n {
        if !seen[v] {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("missing capacity for vertex {v}"),
            });
        }
    }
    Ok(caps)
}

/// A materialized induced subgraph with local contiguous ids plus the mapping
/// back to the host. Cut and embedding routines work on these.
#[derive(Debug, Clone)]
pub struct SubGraph {
    pub host_of: Vec<VertexId>,
    pub local_of: HashMap<VertexId, usize>,
    pub adj: Vec<Vec<usize>>,
    pub m: usize,
}

impl SubGraph {
    pub fn induced(g: &DynamicGraph, verts: &[VertexId]) -> Self {
        let host_of: Vec<VertexId> = verts.to_vec();
        let local_of: HashMap<VertexId, usize> =
            host_of.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); host_of.len()];
        let mut m = 0;
        for (i, &v) in host_of.iter().enumerate() {
            for (u, _) in g.neighbors(v) {
                if let Some(&j) = local_of.get(&u) {
                    adj[i].push(j);
                    if i < j {
                        m += 1;
                    }
                }
            }
        }
        SubGraph {
            host_of,
            local_of,
            adj,
            m,
        }
    }

    /// Build from explicit local edges over `n` local vertices.
    pub fn from_edges(host_of: Vec<VertexId>, edges: &[(usize, usize)]) -> Self {
        let local_of: HashMap<VertexId, usize> =
            host_of.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); host_of.len()];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        SubGraph {
            host_of,
            local_of,
            adj,
            m: edges.len(),
        }
    }

    pub fn n(&self) -> usize {
        self.host_of.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> DynamicGraph {
        load_graph("3 2\n0 1 1\n1 2 1").unwrap()
    }

    #[test]
    fn load_path_graph() {
        let g = path3();
        assert_eq!(g.live_vertices(), 3);
        assert_eq!(g.live_edges(), 2);
        assert_eq!(g.neighbors(1).count(), 2);
    }

    #[test]
    fn load_isolated_vertices() {
        let g = load_graph("2 0").unwrap();
        assert_eq!(g.live_vertices(), 2);
        assert_eq!(g.live_edges(), 0);
    }

    #[test]
    fn load_rejects_self_loop() {
        let err = load_graph("2 1\n0 0 1").unwrap_err();
        assert_eq!(
            err,
            GraphError::Parse {
                line: 2,
                msg: "self-loop at vertex 0".into()
            }
        );
    }

    #[test]
    fn load_rejects_duplicates_and_zero_length() {
        assert!(load_graph("2 2\n0 1 1\n1 0 2").is_err());
        assert!(load_graph("2 1\n0 1 0").is_err());
    }

    #[test]
    fn edge_class_examples() {
        assert_eq!(edge_class(1), 0);
        assert_eq!(edge_class(4), 2);
        assert_eq!(edge_class(7), 2);
        for len in 1..2048u64 {
            let c = edge_class(len);
            assert!(2u64.pow(c) <= len && len < 2u64.pow(c + 1));
            assert_eq!(edge_class(2 * len), c + 1);
        }
    }

    #[test]
    fn rescale_formula() {
        // n = 4, eps = 1, D = 4, len 1 -> 4, D' = 16
        let mut g = DynamicGraph::new(4);
        g.add_edge(0, 1, 1).unwrap();
        let (r, dp) = rescale_lengths(&g, 4, Rational::new(1, 1));
        assert_eq!(r.edge(0).len, 4);
        assert_eq!(dp, 16);
    }

    #[test]
    fn rescale_discards_long_edges() {
        let mut g = DynamicGraph::new(4);
        let e = g.add_edge(0, 1, 9).unwrap();
        let (r, _) = rescale_lengths(&g, 4, Rational::new(1, 1));
        assert!(!r.edge(e).alive);
    }

    #[test]
    fn degree_prune_path_cascades() {
        let g = path3();
        let all: Vec<_> = g.vertices().collect();
        let (j1, j2) = degree_prune(&g, &all, 2);
        assert_eq!(j2, Vec::<usize>::new());
        assert_eq!(j1.len(), 3);
    }

    #[test]
    fn degree_prune_k4_survives() {
        let mut g = DynamicGraph::new(4);
        for u in 0..4 {
            for v in (u + 1)..4 {
                g.add_edge(u, v, 1).unwrap();
            }
        }
        let all: Vec<_> = g.vertices().collect();
        let (j1, j2) = degree_prune(&g, &all, 3);
        assert!(j1.is_empty());
        assert_eq!(j2.len(), 4);
    }

    #[test]
    fn degree_prune_pendant_removed() {
        let mut g = DynamicGraph::new(5);
        for u in 0..4 {
            for v in (u + 1)..4 {
                g.add_edge(u, v, 1).unwrap();
            }
        }
        g.add_edge(0, 4, 1).unwrap();
        let all: Vec<_> = g.vertices().collect();
        let (j1, j2) = degree_prune(&g, &all, 3);
        assert_eq!(j1, vec![4]);
        assert_eq!(j2.len(), 4);
    }

    #[test]
    fn delete_vertex_k3() {
        let mut g = DynamicGraph::new(3);
        g.add_edge(0, 1, 1).unwrap();
        g.add_edge(1, 2, 1).unwrap();
        g.add_edge(0, 2, 1).unwrap();
        let removed = g.delete_vertex(0).unwrap();
        assert_eq!(removed.len(), 2);
        assert_eq!(g.live_edges(), 1);
        assert_eq!(g.delete_vertex(0), Err(GraphError::StaleVertex(0)));
    }

    #[test]
    fn delete_isolated_vertex() {
        let mut g = DynamicGraph::new(2);
        assert_eq!(g.delete_vertex(1).unwrap(), Vec::<usize>::new());
    }
}
