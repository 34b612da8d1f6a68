//! Decremental connectivity / spanning forest (CONN-SF).
//!
//! The default implementation is a Holm–de Lichtenberg–Thorup style layered
//! forest over Euler-tour treaps: deleting a tree edge searches for a
//! replacement level by level, pushing edges down as it goes. A
//! rebuild-on-split [`NaiveForest`] sits behind the same interface for
//! differential testing; callers only rely on the shared contract.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::graph::{DynamicGraph, EdgeId, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConnError {
    #[error("edge {0} is not live in the forest")]
    StaleEdge(EdgeId),
    #[error("vertex {0} is not tracked by the forest")]
    StaleVertex(VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitReport {
    None,
    /// The component split; the two representatives are the endpoints of the
    /// deleted edge, each now in its own component.
    Split(VertexId, VertexId),
}

// ---------------------------------------------------------------------------
// Euler-tour treap

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    pri: u64,
    left: u32,
    right: u32,
    parent: u32,
    /// Vertex id for self nodes; NONE for arc nodes.
    vertex: u32,
    /// Number of self nodes in the subtree.
    cnt_self: u32,
    /// Number of arc nodes flagged "exactly this level" in the subtree.
    cnt_exact: u32,
    /// Number of self nodes whose vertex has non-tree edges at this level.
    cnt_nt: u32,
    /// Smallest vertex id among self nodes in the subtree.
    min_vertex: u32,
    exact: bool,
    nt: bool,
    /// Edge id for arc nodes.
    edge: u32,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// One level of the layered forest: an Euler-tour forest over lazily
/// materialized vertices, with subtree counters that let the replacement
/// search enumerate exactly-level tree arcs and vertices carrying non-tree
/// edges.
#[derive(Debug, Default)]
struct EulerForest {
    nodes: Vec<Node>,
    self_node: HashMap<u32, u32>,
    arcs: HashMap<u32, (u32, u32)>,
}

impl EulerForest {
    fn alloc(&mut self, vertex: u32, edge: u32) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            pri: splitmix(id as u64 + 1),
            left: NONE,
            right: NONE,
            parent: NONE,
            vertex,
            cnt_self: (vertex != NONE) as u32,
            cnt_exact: 0,
            cnt_nt: 0,
            min_vertex: if vertex != NONE { vertex } else { NONE },
            exact: false,
            nt: false,
            edge,
        });
        id
    }

    fn update(&mut self, x: u32) {
        let (l, r) = (self.nodes[x as usize].left, self.nodes[x as usize].right);
        let mut cs = (self.nodes[x as usize].vertex != NONE) as u32;
        let mut ce = self.nodes[x as usize].exact as u32;
        let mut cn = self.nodes[x as usize].nt as u32;
        let mut mv = self.nodes[x as usize].vertex;
        for c in [l, r] {
            if c != NONE {
                cs += self.nodes[c as usize].cnt_self;
                ce += self.nodes[c as usize].cnt_exact;
                cn += self.nodes[c as usize].cnt_nt;
                mv = mv.min(self.nodes[c as usize].min_vertex);
            }
        }
        let n = &mut self.nodes[x as usize];
        n.cnt_self = cs;
        n.cnt_exact = ce;
        n.cnt_nt = cn;
        n.min_vertex = mv;
    }

    fn update_to_root(&mut self, mut x: u32) {
        while x != NONE {
            self.update(x);
            x = self.nodes[x as usize].parent;
        }
    }

    fn root(&self, mut x: u32) -> u32 {
        while self.nodes[x as usize].parent != NONE {
            x = self.nodes[x as usize].parent;
        }
        x
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NONE {
            return b;
        }
        if b == NONE {
            return a;
        }
        if self.nodes[a as usize].pri > self.nodes[b as usize].pri {
            let ar = self.nodes[a as usize].right;
            if ar != NONE {
                self.nodes[ar as usize].parent = NONE;
            }
            let m = self.merge(ar, b);
            self.nodes[a as usize].right = m;
            self.nodes[m as usize].parent = a;
            self.update(a);
            a
        } else {
            let bl = self.nodes[b as usize].left;
            if bl != NONE {
                self.nodes[bl as usize].parent = NONE;
            }
            let m = self.merge(a, bl);
            self.nodes[b as usize].left = m;
            self.nodes[m as usize].parent = b;
            self.update(b);
            b
        }
    }

    /// Split the treap containing `x` into (everything before `x`, `x` and
    /// everything after). Returns the two roots (either may be NONE).
    fn split_before(&mut self, x: u32) -> (u32, u32) {
        let mut l = self.nodes[x as usize].left;
        if l != NONE {
            self.nodes[l as usize].parent = NONE;
        }
        self.nodes[x as usize].left = NONE;
        self.update(x);
        let mut r = x;
        let mut came = x;
        let mut p = self.nodes[x as usize].parent;
        self.nodes[x as usize].parent = NONE;
        while p != NONE {
            let grand = self.nodes[p as usize].parent;
            self.nodes[p as usize].parent = NONE;
            if self.nodes[p as usize].left == came {
                self.nodes[p as usize].left = r;
                if r != NONE {
                    self.nodes[r as usize].parent = p;
                }
                self.update(p);
                r = p;
            } else {
                self.nodes[p as usize].right = l;
                if l != NONE {
                    self.nodes[l as usize].parent = p;
                }
                self.update(p);
                l = p;
            }
            came = p;
            p = grand;
        }
        (l, r)
    }

    /// Order comparison of two nodes in the same treap.
    fn before(&self, a: u32, b: u32) -> bool {
        let chain = |mut x: u32| {
            let mut path = vec![x];
            while self.nodes[x as usize].parent != NONE {
                x = self.nodes[x as usize].parent;
                path.push(x);
            }
            path
        };
        let pa = chain(a);
        let pb = chain(b);
        debug_assert_eq!(pa.last(), pb.last());
        let mut ia = pa.len() - 1;
        let mut ib = pb.len() - 1;
        // Walk down from the shared root until the paths diverge.
        while ia > 0 && ib > 0 && pa[ia - 1] == pb[ib - 1] {
            ia -= 1;
            ib -= 1;
        }
        let join = pa[ia];
        if ia == 0 {
            // `a` is an ancestor of `b`: a < b iff b descends on a's right.
            return self.nodes[join as usize].right == pb[ib - 1];
        }
        if ib == 0 {
            return self.nodes[join as usize].left == pa[ia - 1];
        }
        self.nodes[join as usize].left == pa[ia - 1]
    }

    /// Detach a single node, merging its children into its place. Returns the
    /// root of the remaining treap (NONE if it became empty).
    fn remove_node(&mut self, x: u32) -> u32 {
        let (l, r) = (self.nodes[x as usize].left, self.nodes[x as usize].right);
        for c in [l, r] {
            if c != NONE {
                self.nodes[c as usize].parent = NONE;
            }
        }
        self.nodes[x as usize].left = NONE;
        self.nodes[x as usize].right = NONE;
        let m = self.merge(l, r);
        let p = self.nodes[x as usize].parent;
        self.nodes[x as usize].parent = NONE;
        if p != NONE {
            if self.nodes[p as usize].left == x {
                self.nodes[p as usize].left = m;
            } else {
                self.nodes[p as usize].right = m;
            }
            if m != NONE {
                self.nodes[m as usize].parent = p;
            }
            self.update_to_root(p);
            self.root(p)
        } else {
            m
        }
    }

    fn ensure_vertex(&mut self, v: VertexId) -> u32 {
        if let Some(&s) = self.self_node.get(&(v as u32)) {
            return s;
        }
        let s = self.alloc(v as u32, NONE);
        self.self_node.insert(v as u32, s);
        s
    }

    /// Rotate the tour of `v`'s tree so it starts at `v`'s self node.
    fn reroot(&mut self, v: VertexId) -> u32 {
        let s = self.self_node[&(v as u32)];
        let (l, r) = self.split_before(s);
        self.merge(r, l)
    }

    fn connected(&mut self, u: VertexId, v: VertexId) -> bool {
        let (su, sv) = (self.ensure_vertex(u), self.ensure_vertex(v));
        self.root(su) == self.root(sv)
    }

    fn link(&mut self, u: VertexId, v: VertexId, edge: EdgeId, exact: bool) {
        self.ensure_vertex(u);
        self.ensure_vertex(v);
        debug_assert!(!self.connected(u, v));
        let tu = self.reroot(u);
        let tv = self.reroot(v);
        let a = self.alloc(NONE, edge as u32);
        let b = self.alloc(NONE, edge as u32);
        self.nodes[a as usize].exact = exact;
        self.update(a);
        self.arcs.insert(edge as u32, (a, b));
        let t = self.merge(tu, a);
        let t = self.merge(t, tv);
        self.merge(t, b);
    }

    fn cut(&mut self, edge: EdgeId) {
        let (mut a, mut b) = self.arcs.remove(&(edge as u32)).expect("arc present");
        if !self.before(a, b) {
            std::mem::swap(&mut a, &mut b);
        }
        // Tour = X ++ [a] ++ Y ++ [b] ++ Z; the subtree Y is the severed side
        // and X ++ Z the rest.
        let (x, r1) = self.split_before(a);
        let (m, _z) = self.split_before(b);
        debug_assert_eq!({ let _ = r1; self.root(a) }, self.root(m));
        self.remove_node(a);
        let z2 = self.remove_node(b);
        if x != NONE && z2 != NONE {
            self.merge(x, z2);
        }
    }

    fn set_exact(&mut self, edge: EdgeId, on: bool) {
        let &(a, _) = self.arcs.get(&(edge as u32)).expect("arc present");
        self.nodes[a as usize].exact = on;
        self.update_to_root(a);
    }

    fn set_nt(&mut self, v: VertexId, on: bool) {
        let s = self.ensure_vertex(v);
        if self.nodes[s as usize].nt != on {
            self.nodes[s as usize].nt = on;
            self.update_to_root(s);
        }
    }

    fn comp_size(&mut self, v: VertexId) -> u32 {
        let s = self.ensure_vertex(v);
        let r = self.root(s);
        self.nodes[r as usize].cnt_self
    }

    fn comp_min_vertex(&mut self, v: VertexId) -> u32 {
        let s = self.ensure_vertex(v);
        let r = self.root(s);
        self.nodes[r as usize].min_vertex
    }

    /// Any exactly-level arc in the tree containing `v`.
    fn find_exact_arc(&mut self, v: VertexId) -> Option<EdgeId> {
        let s = self.ensure_vertex(v);
        let mut x = self.root(s);
        if self.nodes[x as usize].cnt_exact == 0 {
            return None;
        }
        loop {
            let n = &self.nodes[x as usize];
            if n.exact {
                return Some(n.edge as EdgeId);
            }
            let l = n.left;
            if l != NONE && self.nodes[l as usize].cnt_exact > 0 {
                x = l;
            } else {
                x = n.right;
            }
        }
    }

    /// Any vertex with non-tree edges at this level in the tree containing `v`.
    fn find_nt_vertex(&mut self, v: VertexId) -> Option<VertexId> {
        let s = self.ensure_vertex(v);
        let mut x = self.root(s);
        if self.nodes[x as usize].cnt_nt == 0 {
            return None;
        }
        loop {
            let n = &self.nodes[x as usize];
            if n.nt {
                return Some(n.vertex as VertexId);
            }
            let l = n.left;
            if l != NONE && self.nodes[l as usize].cnt_nt > 0 {
                x = l;
            } else {
                x = n.right;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Layered decremental forest

#[derive(Debug, Clone)]
struct EdgeRec {
    u: VertexId,
    v: VertexId,
    level: usize,
    is_tree: bool,
    alive: bool,
}

/// The spanning-forest data structure used throughout: decremental
/// connectivity with split reports, arbitrary-path extraction from the
/// maintained forest, and lock-step smaller-side discovery.
#[derive(Debug)]
pub struct SpanningForest {
    levels: Vec<EulerForest>,
    edges: HashMap<EdgeId, EdgeRec>,
    nontree: Vec<HashMap<VertexId, HashSet<EdgeId>>>,
    /// Level-0 forest adjacency, used for path queries and dual BFS.
    forest_adj: Vec<HashMap<VertexId, EdgeId>>,
    n: usize,
    /// Vertices visited by smaller-side searches, for the cost-model tests.
    pub side_search_visits: u64,
}

impl SpanningForest {
    pub fn from_graph(g: &DynamicGraph) -> Self {
        let edges: Vec<(VertexId, VertexId, EdgeId)> = g
            .live_edge_ids()
            .map(|e| (g.edge(e).u, g.edge(e).v, e))
            .collect();
        Self::from_edges(g.n(), &edges)
    }

    pub fn from_edges(n: usize, edge_list: &[(VertexId, VertexId, EdgeId)]) -> Self {
        let max_level = (n.max(2) as f64).log2().floor() as usize + 1;
        let mut sf = SpanningForest {
            levels: (0..=max_level).map(|_| EulerForest::default()).collect(),
            edges: HashMap::new(),
            nontree: (0..=max_level).map(|_| HashMap::new()).collect(),
            forest_adj: vec![HashMap::new(); n],
            n,
            side_search_visits: 0,
        };
        for v in 0..n {
            sf.levels[0].ensure_vertex(v);
        }
        for &(u, v, e) in edge_list {
            sf.insert_edge(u, v, e);
        }
        sf
    }

    fn insert_edge(&mut self, u: VertexId, v: VertexId, e: EdgeId) {
        if self.levels[0].connected(u, v) {
            self.edges.insert(
                e,
                EdgeRec { u, v, level: 0, is_tree: false, alive: true },
            );
            self.add_nontree(e, 0, u, v);
        } else {
            self.edges.insert(
                e,
                EdgeRec { u, v, level: 0, is_tree: true, alive: true },
            );
            self.levels[0].link(u, v, e, true);
            self.forest_adj[u].insert(v, e);
            self.forest_adj[v].insert(u, e);
        }
    }

    pub fn conn(&mut self, u: VertexId, v: VertexId) -> bool {
        u == v || self.levels[0].connected(u, v)
    }

    pub fn component_size(&mut self, v: VertexId) -> usize {
        self.levels[0].comp_size(v) as usize
    }

    fn remove_nontree(&mut self, e: EdgeId, level: usize, u: VertexId, v: VertexId) {
        for x in [u, v] {
            if let Some(set) = self.nontree[level].get_mut(&x) {
                set.remove(&e);
                if set.is_empty() {
                    self.nontree[level].remove(&x);
                    self.levels[level].set_nt(x, false);
                }
            }
        }
    }

    fn add_nontree(&mut self, e: EdgeId, level: usize, u: VertexId, v: VertexId) {
        for x in [u, v] {
            self.nontree[level].entry(x).or_default().insert(e);
            self.levels[level].set_nt(x, true);
        }
    }

    /// Delete a live edge; the caller deletes it from the underlying graph in
    /// the same step. Reports whether the component split.
    pub fn delete_edge(&mut self, e: EdgeId) -> Result<SplitReport, ConnError> {
        let rec = self.edges.get(&e).cloned().ok_or(ConnError::StaleEdge(e))?;
        if !rec.alive {
            return Err(ConnError::StaleEdge(e));
        }
        self.edges.get_mut(&e).unwrap().alive = false;
        let (u, v) = (rec.u, rec.v);
        if !rec.is_tree {
            self.remove_nontree(e, rec.level, u, v);
            return Ok(SplitReport::None);
        }
        // Tree edge: cut at every level it participates in, then search for a
        // replacement from the highest level down.
        for lvl in 0..=rec.level {
            self.levels[lvl].cut(e);
        }
        self.forest_adj[u].remove(&v);
        self.forest_adj[v].remove(&u);
        for lvl in (0..=rec.level).rev() {
            // Work on the smaller of the two trees at this level.
            let (su, sv) = (self.levels[lvl].comp_size(u), self.levels[lvl].comp_size(v));
            let side = if su <= sv { u } else { v };
            // Push exactly-level tree edges of the small side to level lvl+1.
            while let Some(f) = self.levels[lvl].find_exact_arc(side) {
                let fr = self.edges.get_mut(&f).unwrap();
                fr.level = lvl + 1;
                let (fu, fv) = (fr.u, fr.v);
                self.levels[lvl].set_exact(f, false);
                self.levels[lvl + 1].link(fu, fv, f, true);
            }
            // Scan non-tree edges of the small side.
            let mut replacement: Option<(EdgeId, VertexId, VertexId)> = None;
            'scan: while let Some(x) = self.levels[lvl].find_nt_vertex(side) {
                let edges_here: Vec<EdgeId> =
                    self.nontree[lvl].get(&x).into_iter().flatten().copied().collect();
                for f in edges_here {
                    let fr = self.edges[&f].clone();
                    let y = if fr.u == x { fr.v } else { fr.u };
                    if self.levels[lvl].connected(x, y) {
                        // Both endpoints in the small side: push down.
                        self.remove_nontree(f, lvl, fr.u, fr.v);
                        self.add_nontree(f, lvl + 1, fr.u, fr.v);
                        self.edges.get_mut(&f).unwrap().level = lvl + 1;
                    } else {
                        replacement = Some((f, fr.u, fr.v));
                        break 'scan;
                    }
                }
            }
            if let Some((f, fu, fv)) = replacement {
                self.remove_nontree(f, lvl, fu, fv);
                let frec = self.edges.get_mut(&f).unwrap();
                frec.is_tree = true;
                frec.level = lvl;
                for l2 in 0..lvl {
                    self.levels[l2].link(fu, fv, f, false);
                }
                self.levels[lvl].link(fu, fv, f, true);
                self.forest_adj[fu].insert(fv, f);
                self.forest_adj[fv].insert(fu, f);
                return Ok(SplitReport::None);
            }
        }
        Ok(SplitReport::Split(u, v))
    }

    /// Any simple path between `u` and `v` in the maintained forest, or empty
    /// if they are disconnected. Runs in time proportional to the component.
    pub fn path(&mut self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        if u == v {
            return vec![u];
        }
        let mut parent: HashMap<VertexId, VertexId> = HashMap::new();
        let mut q = VecDeque::from([u]);
        parent.insert(u, u);
        while let Some(x) = q.pop_front() {
            if x == v {
                break;
            }
            for (&y, _) in &self.forest_adj[x] {
                if !parent.contains_key(&y) {
                    parent.insert(y, x);
                    q.push_back(y);
                }
            }
        }
        if !parent.contains_key(&v) {
            return Vec::new();
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != u {
            cur = parent[&cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Vertex list of the smaller of the two components created by the split
    /// that returned `(a, b)`. Lock-step dual BFS over the forest; ties go to
    /// the side containing the lower vertex id.
    pub fn smaller_side(&mut self, a: VertexId, b: VertexId) -> Vec<VertexId> {
        let size_a = self.levels[0].comp_size(a) as usize;
        let size_b = self.levels[0].comp_size(b) as usize;
        let pick_a = if size_a != size_b {
            size_a < size_b
        } else {
            self.levels[0].comp_min_vertex(a) < self.levels[0].comp_min_vertex(b)
        };
        // Lock-step dual BFS: alternate single-vertex expansions until the
        // smaller side is fully explored, so the work is O(min side).
        let mut seen_a: HashSet<VertexId> = HashSet::from([a]);
        let mut seen_b: HashSet<VertexId> = HashSet::from([b]);
        let mut qa = VecDeque::from([a]);
        let mut qb = VecDeque::from([b]);
        loop {
            if let Some(x) = qa.pop_front() {
                self.side_search_visits += 1;
                for (&y, _) in &self.forest_adj[x] {
                    if seen_a.insert(y) {
                        qa.push_back(y);
                    }
                }
            }
            if qa.is_empty() {
                break;
            }
            if let Some(x) = qb.pop_front() {
                self.side_search_visits += 1;
                for (&y, _) in &self.forest_adj[x] {
                    if seen_b.insert(y) {
                        qb.push_back(y);
                    }
                }
            }
            if qb.is_empty() {
                break;
            }
        }
        let mut side: Vec<VertexId> = if pick_a {
            if qa.is_empty() {
                seen_a.into_iter().collect()
            } else {
                self.collect_component(a)
            }
        } else if qb.is_empty() {
            seen_b.into_iter().collect()
        } else {
            self.collect_component(b)
        };
        side.sort_unstable();
        side
    }

    pub fn collect_component(&mut self, v: VertexId) -> Vec<VertexId> {
        let mut seen = HashSet::from([v]);
        let mut q = VecDeque::from([v]);
        while let Some(x) = q.pop_front() {
            for (&y, _) in &self.forest_adj[x] {
                if seen.insert(y) {
                    q.push_back(y);
                }
            }
        }
        let mut out: Vec<VertexId> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// Live forest edge count; equals live vertices minus components.
    pub fn forest_edge_count(&self) -> usize {
        self.forest_adj.iter().map(|m| m.len()).sum::<usize>() / 2
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

// ---------------------------------------------------------------------------
// Naive fallback

/// Rebuild-on-demand fallback with the same contract, used to differential
/// test the layered forest.
#[derive(Debug)]
pub struct NaiveForest {
    adj: Vec<HashMap<VertexId, EdgeId>>,
    alive: HashMap<EdgeId, (VertexId, VertexId)>,
}

impl NaiveForest {
    pub fn from_edges(n: usize, edge_list: &[(VertexId, VertexId, EdgeId)]) -> Self {
        let mut adj = vec![HashMap::new(); n];
        let mut alive = HashMap::new();
        for &(u, v, e) in edge_list {
            adj[u].insert(v, e);
            adj[v].insert(u, e);
            alive.insert(e, (u, v));
        }
        NaiveForest { adj, alive }
    }

    fn reach(&self, u: VertexId, v: VertexId) -> bool {
        let mut seen = HashSet::from([u]);
        let mut q = VecDeque::from([u]);
        while let Some(x) = q.pop_front() {
            if x == v {
                return true;
            }
            for (&y, _) in &self.adj[x] {
                if seen.insert(y) {
                    q.push_back(y);
                }
            }
        }
        false
    }

    pub fn conn(&self, u: VertexId, v: VertexId) -> bool {
        u == v || self.reach(u, v)
    }

    pub fn delete_edge(&mut self, e: EdgeId) -> Result<SplitReport, ConnError> {
        let (u, v) = self.alive.remove(&e).ok_or(ConnError::StaleEdge(e))?;
        self.adj[u].remove(&v);
        self.adj[v].remove(&u);
        if self.reach(u, v) {
            Ok(SplitReport::None)
        } else {
            Ok(SplitReport::Split(u, v))
        }
    }
}
