//! Classic Even-Shiloach tree: an exact shortest-path tree from a source up
//! to distance `D` under edge deletions, eligible edge insertions, and
//! isolated-vertex insertions.
//!
//! The update procedure follows the textbook four-state scheme: a global heap
//! of vertices to inspect, ordered by label; a vertex either reattaches at
//! its current label or its label rises by exactly one. Labels never decrease
//! over the structure's lifetime.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::graph::{EdgeId, VertexId, INF};
use crate::oracle;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EsError {
    #[error("edge {0} is not live in the tree")]
    StaleEdge(EdgeId),
    #[error("vertex {0} already exists")]
    DuplicateVertex(VertexId),
    #[error("vertex {0} is unknown")]
    UnknownVertex(VertexId),
    #[error("edge ({0},{1}) is not eligible for insertion")]
    IneligibleEdge(VertexId, VertexId),
}

#[derive(Debug, Clone)]
struct EsEdge {
    u: VertexId,
    v: VertexId,
    len: u64,
    alive: bool,
}

impl EsEdge {
    fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug)]
pub struct EsTree {
    root: VertexId,
    bound: u64,
    edges: Vec<EsEdge>,
    adj: Vec<Vec<EdgeId>>,
    present: Vec<bool>,
    delta: Vec<u64>,
    parent: Vec<Option<EdgeId>>,
    /// Lazy per-vertex heaps keyed by `delta(nbr) + len`; entries go stale
    /// when the neighbor's label moves and are skipped on pop.
    heaps: Vec<BinaryHeap<Reverse<(u64, EdgeId)>>>,
    /// Work counter: vertex inspections performed by update procedures.
    pub inspections: u64,
    /// When set, insertions are checked against a Dijkstra oracle.
    pub verify_inserts: bool,
}

impl EsTree {
    /// Build the tree over an explicit edge list. `n` is the id space size;
    /// vertices without edges are simply far away.
    pub fn new(n: usize, edge_list: &[(VertexId, VertexId, u64)], root: VertexId, bound: u64) -> Self {
        let mut t = EsTree {
            root,
            bound,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            present: vec![true; n],
            delta: vec![INF; n],
            parent: vec![None; n],
            heaps: (0..n).map(|_| BinaryHeap::new()).collect(),
            inspections: 0,
            verify_inserts: false,
        };
        for &(u, v, len) in edge_list {
            let id = t.edges.len();
            t.edges.push(EsEdge { u, v, len, alive: true });
            t.adj[u].push(id);
            t.adj[v].push(id);
        }
        t.rebuild_labels();
        t
    }

    pub fn from_graph(g: &crate::graph::DynamicGraph, root: VertexId, bound: u64) -> Self {
        let edges: Vec<(VertexId, VertexId, u64)> = g
            .live_edge_ids()
            .map(|e| (g.edge(e).u, g.edge(e).v, g.edge(e).len))
            .collect();
        let mut t = Self::new(g.n(), &edges, root, bound);
        for v in 0..g.n() {
            t.present[v] = g.is_alive(v);
        }
        t
    }

    /// Dijkstra initialization capped at the bound; heaps seeded from the
    /// exact labels.
    fn rebuild_labels(&mut self) {
        let n = self.adj.len();
        self.delta = vec![INF; n];
        self.parent = vec![None; n];
        self.delta[self.root] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, self.root)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > self.delta[v] {
                continue;
            }
            for &e in &self.adj[v] {
                let ed = &self.edges[e];
                if !ed.alive {
                    continue;
                }
                let u = ed.other(v);
                if !self.present[u] {
                    continue;
                }
                let nd = d + ed.len;
                if nd <= self.bound && nd < self.delta[u] {
                    self.delta[u] = nd;
                    self.parent[u] = Some(e);
                    heap.push(Reverse((nd, u)));
                }
            }
        }
        for v in 0..n {
            self.heaps[v].clear();
        }
        for e in 0..self.edges.len() {
            if self.edges[e].alive {
                self.push_entries(e);
            }
        }
    }

    fn push_entries(&mut self, e: EdgeId) {
        let (u, v, len) = {
            let ed = &self.edges[e];
            (ed.u, ed.v, ed.len)
        };
        if self.delta[v] != INF {
            self.heaps[u].push(Reverse((self.delta[v].saturating_add(len), e)));
        }
        if self.delta[u] != INF {
            self.heaps[v].push(Reverse((self.delta[u].saturating_add(len), e)));
        }
    }

    pub fn delta(&self, v: VertexId) -> u64 {
        self.delta[v]
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn in_tree(&self, v: VertexId) -> bool {
        self.delta[v] != INF
    }

    pub fn edge_endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        (self.edges[e].u, self.edges[e].v)
    }

    /// Current label plus the tree path from the root, or `None` when the
    /// vertex is beyond the bound.
    pub fn query(&self, v: VertexId) -> (u64, Option<Vec<VertexId>>) {
        if self.delta[v] == INF {
            return (INF, None);
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != self.root {
            let e = self.parent[cur].expect("tree vertex has a parent");
            cur = self.edges[e].other(cur);
            path.push(cur);
        }
        path.reverse();
        (self.delta[v], Some(path))
    }

    /// Like `query`, additionally reporting the tree edge ids along the path.
    pub fn query_with_edges(&self, v: VertexId) -> (u64, Option<(Vec<VertexId>, Vec<EdgeId>)>) {
        if self.delta[v] == INF {
            return (INF, None);
        }
        let mut path = vec![v];
        let mut eids = Vec::new();
        let mut cur = v;
        while cur != self.root {
            let e = self.parent[cur].expect("tree vertex has a parent");
            eids.push(e);
            cur = self.edges[e].other(cur);
            path.push(cur);
        }
        path.reverse();
        eids.reverse();
        (self.delta[v], Some((path, eids)))
    }

    /// Smallest candidate label of `v` from its current neighbors, popping
    /// stale heap entries.
    fn best_candidate(&mut self, v: VertexId) -> Option<(u64, EdgeId)> {
        while let Some(&Reverse((key, e))) = self.heaps[v].peek() {
            let ed = &self.edges[e];
            let u = ed.other(v);
            if !ed.alive || !self.present[u] || self.delta[u] == INF {
                self.heaps[v].pop();
                continue;
            }
            let fresh = self.delta[u].saturating_add(ed.len);
            if fresh != key {
                self.heaps[v].pop();
                if fresh != INF {
                    self.heaps[v].push(Reverse((fresh, e)));
                }
                continue;
            }
            return Some((key, e));
        }
        None
    }

    /// The four-state update loop. `work` seeds the vertices whose labels may
    /// need to rise.
    fn settle(&mut self, work: Vec<VertexId>) {
        let mut heap: BinaryHeap<Reverse<(u64, VertexId)>> = BinaryHeap::new();
        let mut queued: HashMap<VertexId, u64> = HashMap::new();
        for v in work {
            if self.delta[v] != INF {
                heap.push(Reverse((self.delta[v], v)));
                queued.insert(v, self.delta[v]);
            }
        }
        while let Some(Reverse((d, x))) = heap.pop() {
            if queued.get(&x) != Some(&d) || self.delta[x] != d {
                continue;
            }
            queued.remove(&x);
            self.inspections += 1;
            match self.best_candidate(x) {
                Some((key, e)) if key <= d => {
                    debug_assert!(key == d, "labels can only be matched, never lowered");
                    self.parent[x] = Some(e);
                }
                other => {
                    // No neighbor supports the current label: raise by one,
                    // or detach once past the bound.
                    let detach = match other {
                        Some((key, _)) => key > self.bound,
                        None => true,
                    };
                    let nd = d + 1;
                    if detach || nd > self.bound {
                        self.detach(x, &mut heap, &mut queued);
                    } else {
                        self.delta[x] = nd;
                        self.parent[x] = None;
                        heap.push(Reverse((nd, x)));
                        queued.insert(x, nd);
                        self.touch_neighbors(x, &mut heap, &mut queued);
                    }
                }
            }
        }
    }

    /// After `delta(x)` changed, refresh the neighbors' view of `x` and
    /// enqueue the tree children that hung below it.
    fn touch_neighbors(
        &mut self,
        x: VertexId,
        heap: &mut BinaryHeap<Reverse<(u64, VertexId)>>,
        queued: &mut HashMap<VertexId, u64>,
    ) {
        let adj = self.adj[x].clone();
        for e in adj {
            if !self.edges[e].alive {
                continue;
            }
            let z = self.edges[e].other(x);
            if !self.present[z] {
                continue;
            }
            if self.delta[x] != INF {
                let key = self.delta[x].saturating_add(self.edges[e].len);
                self.heaps[z].push(Reverse((key, e)));
            }
            if self.parent[z] == Some(e) && self.delta[z] != INF {
                let entry = queued.entry(z).or_insert(u64::MAX);
                if *entry > self.delta[z] {
                    *entry = self.delta[z];
                    heap.push(Reverse((self.delta[z], z)));
                }
            }
        }
    }

    fn detach(
        &mut self,
        x: VertexId,
        heap: &mut BinaryHeap<Reverse<(u64, VertexId)>>,
        queued: &mut HashMap<VertexId, u64>,
    ) {
        self.delta[x] = INF;
        self.parent[x] = None;
        queued.remove(&x);
        // Children of x lose their support and must be inspected.
        let adj = self.adj[x].clone();
        for e in adj {
            if !self.edges[e].alive {
                continue;
            }
            let z = self.edges[e].other(x);
            if self.present[z] && self.parent[z] == Some(e) && self.delta[z] != INF {
                let entry = queued.entry(z).or_insert(u64::MAX);
                if *entry > self.delta[z] {
                    *entry = self.delta[z];
                    heap.push(Reverse((self.delta[z], z)));
                }
            }
        }
    }

    pub fn delete_edge(&mut self, e: EdgeId) -> Result<(), EsError> {
        if e >= self.edges.len() || !self.edges[e].alive {
            return Err(EsError::StaleEdge(e));
        }
        self.edges[e].alive = false;
        let (u, v) = (self.edges[e].u, self.edges[e].v);
        let child = if self.parent[u] == Some(e) {
            Some(u)
        } else if self.parent[v] == Some(e) {
            Some(v)
        } else {
            None
        };
        if let Some(c) = child {
            self.parent[c] = None;
            self.settle(vec![c]);
        }
        Ok(())
    }

    /// Remove every live edge incident to `v` and mark it absent. Used by the
    /// routing procedures that delete path interiors.
    pub fn delete_vertex(&mut self, v: VertexId) {
        let adj = std::mem::take(&mut self.adj[v]);
        let mut orphans = Vec::new();
        for &e in &adj {
            if !self.edges[e].alive {
                continue;
            }
            self.edges[e].alive = false;
            let z = self.edges[e].other(v);
            if self.present[z] && self.parent[z] == Some(e) && self.delta[z] != INF {
                orphans.push(z);
            }
        }
        self.present[v] = false;
        self.delta[v] = INF;
        self.parent[v] = None;
        self.settle(orphans);
    }

    /// Insert an eligible edge: either one endpoint is isolated (label INF
    /// with no live edges), or no distance from the root decreases. The
    /// caller guarantees eligibility; with `verify_inserts` the claim is
    /// checked against a Dijkstra oracle.
    pub fn insert_edge(&mut self, u: VertexId, v: VertexId, len: u64) -> Result<EdgeId, EsError> {
        if u >= self.adj.len() || !self.present[u] {
            return Err(EsError::UnknownVertex(u));
        }
        if v >= self.adj.len() || !self.present[v] {
            return Err(EsError::UnknownVertex(v));
        }
        let isolated =
            |t: &Self, x: VertexId| t.adj[x].iter().all(|&e| !t.edges[e].alive);
        let u_iso = isolated(self, u);
        let v_iso = isolated(self, v);
        if self.verify_inserts && !u_iso && !v_iso {
            let before = self.oracle_distances();
            let mut after = self.clone_edges_with(u, v, len);
            let da = oracle::dijkstra_all(&after.0, self.root);
            let _ = &mut after;
            for x in 0..self.adj.len() {
                if da[x] < before[x] {
                    return Err(EsError::IneligibleEdge(u, v));
                }
            }
        }
        let id = self.edges.len();
        self.edges.push(EsEdge { u, v, len, alive: true });
        self.adj[u].push(id);
        self.adj[v].push(id);
        // An isolated endpoint attaches below the other one.
        if u_iso || v_iso {
            let (iso, other) = if u_iso { (u, v) } else { (v, u) };
            if self.delta[other] != INF {
                let nd = self.delta[other].saturating_add(len);
                if nd <= self.bound && nd < self.delta[iso] {
                    self.delta[iso] = nd;
                    self.parent[iso] = Some(id);
                }
            }
        }
        self.push_entries(id);
        Ok(id)
    }

    /// Add a brand-new isolated vertex with the given id.
    pub fn insert_vertex(&mut self, v: VertexId) -> Result<(), EsError> {
        if v < self.adj.len() && self.present[v] {
            return Err(EsError::DuplicateVertex(v));
        }
        while self.adj.len() <= v {
            self.adj.push(Vec::new());
            self.present.push(false);
            self.delta.push(INF);
            self.parent.push(None);
            self.heaps.push(BinaryHeap::new());
        }
        self.present[v] = true;
        self.delta[v] = INF;
        Ok(())
    }

    fn oracle_distances(&self) -> Vec<u64> {
        let (g, _) = self.clone_edges_with(0, 0, 0);
        oracle::dijkstra_all(&g, self.root)
    }

    /// Snapshot as a DynamicGraph, optionally with one extra edge (ignored
    /// when u == v).
    fn clone_edges_with(
        &self,
        u: VertexId,
        v: VertexId,
        len: u64,
    ) -> (crate::graph::DynamicGraph, ()) {
        let mut g = crate::graph::DynamicGraph::new(self.adj.len());
        for x in 0..self.adj.len() {
            if !self.present[x] && g.is_alive(x) {
                let _ = g.delete_vertex(x);
            }
        }
        for ed in &self.edges {
            if ed.alive && self.present[ed.u] && self.present[ed.v] {
                let _ = g.add_edge(ed.u, ed.v, ed.len);
            }
        }
        if u != v && self.present[u] && self.present[v] {
            let _ = g.add_edge(u, v, len);
        }
        (g, ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{load_graph, DynamicGraph};
    use rand::{Rng, SeedableRng};

    fn assert_matches_oracle(t: &EsTree, g: &DynamicGraph, s: VertexId) {
        let d = oracle::dijkstra_all(g, s);
        for v in 0..g.n() {
            if !g.is_alive(v) {
                continue;
            }
            if d[v] <= t.bound() {
                assert_eq!(t.delta(v), d[v], "vertex {v}");
                let (dv, path) = t.query(v);
                assert_eq!(dv, d[v]);
                let path = path.unwrap();
                let mut sum = 0;
                for w in path.windows(2) {
                    let mut found = None;
                    for (x, e) in g.neighbors(w[0]) {
                        if x == w[1] {
                            found = Some(g.edge(e).len);
                            break;
                        }
                    }
                    sum += found.expect("path edge exists");
                }
                assert_eq!(sum, d[v], "tree path realizes the label");
            } else {
                assert_eq!(t.delta(v), INF, "vertex {v} beyond bound");
                assert!(t.query(v).1.is_none());
            }
        }
    }

    #[test]
    fn init_p3() {
        let g = load_graph("3 2\n0 1 1\n1 2 1").unwrap();
        let t = EsTree::from_graph(&g, 0, 10);
        assert_eq!((t.delta(0), t.delta(1), t.delta(2)), (0, 1, 2));
        let t = EsTree::from_graph(&g, 0, 1);
        assert_eq!(t.delta(2), INF);
        assert!(t.query(2).1.is_none());
    }

    #[test]
    fn root_query() {
        let g = load_graph("2 1\n0 1 1").unwrap();
        let t = EsTree::from_graph(&g, 0, 5);
        assert_eq!(t.query(0), (0, Some(vec![0])));
    }

    #[test]
    fn triangle_reroute() {
        // s=0, a=1, b=2; deleting (0,1) forces a's label from 1 to 2 via b.
        let mut g = load_graph("3 3\n0 1 1\n0 2 1\n1 2 1").unwrap();
        let mut t = EsTree::from_graph(&g, 0, 10);
        t.delete_edge(0).unwrap();
        g.delete_edge(0).unwrap();
        assert_eq!(t.delta(1), 2);
        assert_matches_oracle(&t, &g, 0);
    }

    #[test]
    fn delete_nontree_edge_changes_nothing() {
        let g = load_graph("3 3\n0 1 1\n0 2 1\n1 2 5").unwrap();
        let mut t = EsTree::from_graph(&g, 0, 10);
        let before: Vec<u64> = (0..3).map(|v| t.delta(v)).collect();
        t.delete_edge(2).unwrap();
        let after: Vec<u64> = (0..3).map(|v| t.delta(v)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn stale_edge_rejected() {
        let g = load_graph("2 1\n0 1 1").unwrap();
        let mut t = EsTree::from_graph(&g, 0, 5);
        t.delete_edge(0).unwrap();
        assert_eq!(t.delete_edge(0), Err(EsError::StaleEdge(0)));
    }

    #[test]
    fn vertex_insert_then_attach() {
        let g = load_graph("2 1\n0 1 2").unwrap();
        let mut t = EsTree::from_graph(&g, 0, 10);
        t.insert_vertex(2).unwrap();
        assert_eq!(t.delta(2), INF);
        assert_eq!(t.insert_vertex(2), Err(EsError::DuplicateVertex(2)));
        t.insert_edge(1, 2, 3).unwrap();
        assert_eq!(t.delta(2), 5);
    }

    #[test]
    fn insert_between_tree_vertices_no_change() {
        let g = load_graph("3 2\n0 1 2\n0 2 3").unwrap();
        let mut t = EsTree::from_graph(&g, 0, 10);
        t.insert_edge(1, 2, 5).unwrap();
        assert_eq!((t.delta(1), t.delta(2)), (2, 3));
    }

    #[test]
    fn shortcut_insert_rejected_by_oracle_check() {
        let g = load_graph("3 2\n0 1 5\n1 2 5").unwrap();
        let mut t = EsTree::from_graph(&g, 0, 100);
        t.verify_inserts = true;
        assert_eq!(t.insert_edge(0, 2, 1), Err(EsError::IneligibleEdge(0, 2)));
    }

    #[test]
    fn random_deletions_match_dijkstra() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xE5);
        for round in 0..25 {
            let n = rng.gen_range(2..40);
            let mut g = DynamicGraph::new(n);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.25) {
                        let len = rng.gen_range(1..=8);
                        let e = g.add_edge(u, v, len).unwrap();
                        edges.push(e);
                    }
                }
            }
            let bound = rng.gen_range(3..40);
            let mut t = EsTree::from_graph(&g, 0, bound);
            assert_matches_oracle(&t, &g, 0);
            for i in (1..edges.len()).rev() {
                let j = rng.gen_range(0..=i);
                edges.swap(i, j);
            }
            for &e in &edges {
                t.delete_edge(e).unwrap();
                g.delete_edge(e).unwrap();
                assert_matches_oracle(&t, &g, 0);
            }
            let _ = round;
        }
    }

    #[test]
    fn monotone_labels_and_work_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 30;
        let mut g = DynamicGraph::new(n);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(0.3) {
                    edges.push(g.add_edge(u, v, rng.gen_range(1..=4)).unwrap());
                }
            }
        }
        let m = edges.len() as u64;
        let bound = 20;
        let mut t = EsTree::from_graph(&g, 0, bound);
        let mut last: Vec<u64> = (0..n).map(|v| t.delta(v)).collect();
        let mut deletions = 0u64;
        for &e in &edges {
            t.delete_edge(e).unwrap();
            g.delete_edge(e).unwrap();
            deletions += 1;
            for v in 0..n {
                assert!(t.delta(v) >= last[v], "labels never decrease");
                last[v] = t.delta(v);
            }
        }
        // Work-bound sanity: inspections scale with m * D plus the updates.
        assert!(t.inspections <= 4 * (m * bound + deletions + 1));
    }
}
