//! Weight-sensitive Even-Shiloach tree over the extended light graph.
//!
//! Distances are scaled by 4 so the quarter-length special edges have length
//! 1, and everything is then held in integer units of eps = 1/k: labels,
//! local copies, and heap keys are exact integers, never floats. A neighbor's
//! view of delta(u) refreshes only when delta(u) crosses its stored copy;
//! refreshed copies land on the next multiple of eps*len(e), so edges with
//! large lengths are touched proportionally less often.
//!
//! Between updates the labels satisfy the usual sandwich: for every tree
//! vertex, dist <= delta <= (1+eps) dist, and the tree path realizes a length
//! of at most delta. Detached vertices keep a frozen label certifying that
//! their distance exceeds the bound.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use thiserror::Error;

use crate::graph::{EdgeId, VertexId};
use crate::params::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WsesError {
    #[error("edge {0} is not live")]
    StaleEdge(EdgeId),
    #[error("no live edge joins {0} and {1}")]
    NoSuchEdge(VertexId, VertexId),
    #[error("edge ({0},{1}) is not eligible: no common special neighbor")]
    Ineligible(VertexId, VertexId),
    #[error("vertex {0} is not a special vertex")]
    NotSpecial(VertexId),
    #[error("member list inconsistent: {0} is not adjacent to the cluster vertex")]
    BadMember(VertexId),
    #[error("eps must be at most 1/5 after snapping; got 1/{0}")]
    BadEps(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Regular,
    Special,
}

/// Smallest multiple of `eps * len` strictly greater than `x`; the rounding
/// grid of local copies.
pub fn round_e(x: Rational, len: u64, eps: Rational) -> Rational {
    let grid = eps * Rational::from_integer(len as i64);
    let q = (x / grid).floor() + Rational::from_integer(1);
    q * grid
}

fn round_units(x: u64, grid: u64) -> u64 {
    (x / grid + 1) * grid
}

#[derive(Debug, Clone)]
struct WEdge {
    ends: [VertexId; 2],
    /// Length after the x4 scaling: 1 for special edges, 4*len otherwise.
    scaled_len: u64,
    alive: bool,
    /// copy[i] = the view endpoint i holds of the other endpoint's label.
    copy: [u64; 2],
}

impl WEdge {
    fn side(&self, v: VertexId) -> usize {
        if self.ends[0] == v {
            0
        } else {
            1
        }
    }
    fn other(&self, v: VertexId) -> VertexId {
        self.ends[self.side(v) ^ 1]
    }
}

#[derive(Debug, Clone)]
pub enum WsesAnswer {
    InTree {
        /// Label in 1/(4k) units of the original lengths.
        delta_units: u64,
        path: Vec<VertexId>,
    },
    /// Certificate that the distance exceeds the bound.
    Far,
}

#[derive(Debug)]
pub struct WsesTree {
    k: u64,
    root: VertexId,
    /// (1+eps) * 4D in units: tree membership threshold.
    tree_bound: u64,
    kinds: Vec<VertexKind>,
    present: Vec<bool>,
    edges: Vec<WEdge>,
    adj: Vec<Vec<EdgeId>>,
    pair: HashMap<(VertexId, VertexId), EdgeId>,
    special_adj: Vec<HashSet<VertexId>>,
    delta: Vec<u64>,
    in_tree: Vec<bool>,
    frozen: Vec<bool>,
    parent: Vec<Option<EdgeId>>,
    heaps: Vec<BinaryHeap<Reverse<(u64, EdgeId)>>>,
    /// buckets[v][c] holds edges whose far-side copy of v fires once
    /// delta(v) exceeds c. Allocated lazily.
    buckets: Vec<HashMap<u64, Vec<EdgeId>>>,
    pub copy_refreshes: u64,
    pub inspections: u64,
}

impl WsesTree {
    /// Build over scaled lengths (1 = special quarter edge, 4*len = regular).
    /// `d` is the unscaled distance bound; eps is snapped down to 1/k, k > 4.
    pub fn new(
        kinds: Vec<VertexKind>,
        edge_list: &[(VertexId, VertexId, u64)],
        root: VertexId,
        d: u64,
        eps: Rational,
    ) -> Result<Self, WsesError> {
        let k = snap_k(eps);
        if k < 5 {
            return Err(WsesError::BadEps(k));
        }
        let n = kinds.len();
        let d_units = 4 * d * k;
        let tree_bound = d_units + d_units / k;
        let mut t = WsesTree {
            k,
            root,
            tree_bound,
            kinds,
            present: vec![true; n],
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            pair: HashMap::new(),
            special_adj: vec![HashSet::new(); n],
            delta: vec![0; n],
            in_tree: vec![false; n],
            frozen: vec![false; n],
            parent: vec![None; n],
            heaps: (0..n).map(|_| BinaryHeap::new()).collect(),
            buckets: vec![HashMap::new(); n],
            copy_refreshes: 0,
            inspections: 0,
        };
        for &(u, w, scaled_len) in edge_list {
            t.raw_add_edge(u, w, scaled_len);
        }
        t.init_labels();
        Ok(t)
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn tree_bound(&self) -> u64 {
        self.tree_bound
    }

    fn len_units(&self, e: EdgeId) -> u64 {
        self.edges[e].scaled_len * self.k
    }

    /// Rounding grid of an edge in units: eps * scaled_len scaled by k.
    fn grid(&self, e: EdgeId) -> u64 {
        self.edges[e].scaled_len
    }

    fn raw_add_edge(&mut self, u: VertexId, w: VertexId, scaled_len: u64) -> EdgeId {
        let id = self.edges.len();
        self.edges.push(WEdge {
            ends: [u, w],
            scaled_len,
            alive: true,
            copy: [0, 0],
        });
        self.adj[u].push(id);
        self.adj[w].push(id);
        self.pair.insert(pair_key(u, w), id);
        if self.kinds[u] == VertexKind::Special {
            self.special_adj[w].insert(u);
        }
        if self.kinds[w] == VertexKind::Special {
            self.special_adj[u].insert(w);
        }
        id
    }

    fn drop_edge_indexes(&mut self, e: EdgeId) {
        let [u, w] = self.edges[e].ends;
        self.pair.remove(&pair_key(u, w));
        if self.kinds[u] == VertexKind::Special {
            self.special_adj[w].remove(&u);
        }
        if self.kinds[w] == VertexKind::Special {
            self.special_adj[u].remove(&w);
        }
    }

    /// Exact Dijkstra labels in units, frozen past the bound; copies start as
    /// the exact neighbor labels and buckets fire at the stored copy.
    fn init_labels(&mut self) {
        let n = self.kinds.len();
        let far = self.tree_bound + 1;
        let mut dist = vec![u64::MAX; n];
        dist[self.root] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, self.root)));
        let mut parent: Vec<Option<EdgeId>> = vec![None; n];
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for i in 0..self.adj[v].len() {
                let e = self.adj[v][i];
                if !self.edges[e].alive {
                    continue;
                }
                let u = self.edges[e].other(v);
                let nd = d + self.len_units(e);
                if nd <= self.tree_bound && nd < dist[u] {
                    dist[u] = nd;
                    parent[u] = Some(e);
                    heap.push(Reverse((nd, u)));
                }
            }
        }
        for v in 0..n {
            if dist[v] <= self.tree_bound {
                self.delta[v] = dist[v];
                self.in_tree[v] = true;
                self.parent[v] = parent[v];
            } else {
                self.delta[v] = far;
                self.in_tree[v] = false;
                self.frozen[v] = true;
            }
        }
        for e in 0..self.edges.len() {
            if self.edges[e].alive {
                let [u, w] = self.edges[e].ends;
                self.edges[e].copy = [self.delta[w], self.delta[u]];
                self.seat_edge(e, 0);
                self.seat_edge(e, 1);
            }
        }
    }

    /// Install heap and bucket entries for one side of an edge: side i holds
    /// a copy of the far endpoint, and sits in the far endpoint's bucket at
    /// the copy value.
    fn seat_edge(&mut self, e: EdgeId, side: usize) {
        let holder = self.edges[e].ends[side];
        let far = self.edges[e].ends[side ^ 1];
        let key = self.edges[e].copy[side].saturating_add(self.len_units(e));
        self.heaps[holder].push(Reverse((key, e)));
        let fire_at = self.edges[e].copy[side];
        self.buckets[far].entry(fire_at).or_default().push(e);
    }

    pub fn delta_units(&self, v: VertexId) -> u64 {
        self.delta[v]
    }

    pub fn is_in_tree(&self, v: VertexId) -> bool {
        self.in_tree[v]
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.kinds[v]
    }

    pub fn edge_between(&self, u: VertexId, w: VertexId) -> Option<EdgeId> {
        self.pair.get(&pair_key(u, w)).copied()
    }

    pub fn edge_scaled_len(&self, e: EdgeId) -> u64 {
        self.edges[e].scaled_len
    }

    pub fn query(&self, v: VertexId) -> WsesAnswer {
        if !self.in_tree[v] {
            return WsesAnswer::Far;
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != self.root {
            let e = self.parent[cur].expect("tree vertex has a parent");
            cur = self.edges[e].other(cur);
            path.push(cur);
        }
        path.reverse();
        WsesAnswer::InTree {
            delta_units: self.delta[v],
            path,
        }
    }

    /// Sum of scaled lengths along a vertex path, in units.
    pub fn path_len_units(&self, path: &[VertexId]) -> u64 {
        path.windows(2)
            .map(|w| {
                let e = self.edge_between(w[0], w[1]).expect("path edge");
                self.len_units(e)
            })
            .sum()
    }

    fn best_candidate(&mut self, v: VertexId) -> Option<(u64, EdgeId)> {
        while let Some(&Reverse((key, e))) = self.heaps[v].peek() {
            let ed = &self.edges[e];
            if !ed.alive {
                self.heaps[v].pop();
                continue;
            }
            let side = ed.side(v);
            let fresh = ed.copy[side].saturating_add(self.len_units(e));
            if fresh != key {
                self.heaps[v].pop();
                self.heaps[v].push(Reverse((fresh, e)));
                continue;
            }
            return Some((key, e));
        }
        None
    }

    /// The update loop shared by deletions: raise labels in unit steps,
    /// firing buckets as copies are outgrown, until every seeded vertex
    /// reattaches or the remainder is certified far and frozen.
    fn settle(&mut self, seeds: Vec<VertexId>) {
        let mut heap: BinaryHeap<Reverse<(u64, VertexId)>> = BinaryHeap::new();
        let mut queued: HashMap<VertexId, u64> = HashMap::new();
        for v in seeds {
            if v != self.root && !self.frozen[v] && self.present[v] {
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
            if d > self.tree_bound {
                // Everything still pending is certifiably far; freeze x, the
                // rest of the heap, and their hanging subtrees.
                let mut pending: Vec<VertexId> = vec![x];
                while let Some(Reverse((d2, y))) = heap.pop() {
                    if queued.get(&y) == Some(&d2) && self.delta[y] == d2 {
                        pending.push(y);
                    }
                }
                queued.clear();
                for y in pending {
                    self.freeze_subtree(y);
                }
                return;
            }
            match self.best_candidate(x) {
                Some((key, e)) if key <= d => {
                    debug_assert_eq!(key, d, "reattachment happens at the current label");
                    self.parent[x] = Some(e);
                    self.in_tree[x] = true;
                }
                _ => {
                    let old = d;
                    self.delta[x] = d + 1;
                    self.in_tree[x] = false;
                    self.parent[x] = None;
                    heap.push(Reverse((d + 1, x)));
                    queued.insert(x, d + 1);
                    self.fire_bucket(x, old, &mut heap, &mut queued);
                }
            }
        }
    }

    /// delta(x) just moved past `old`: refresh every copy of x stored at that
    /// threshold, re-seat the edges, and enqueue the holders.
    fn fire_bucket(
        &mut self,
        x: VertexId,
        old: u64,
        heap: &mut BinaryHeap<Reverse<(u64, VertexId)>>,
        queued: &mut HashMap<VertexId, u64>,
    ) {
        let Some(list) = self.buckets[x].remove(&old) else {
            return;
        };
        for e in list {
            if !self.edges[e].alive {
                continue;
            }
            let side_far = self.edges[e].side(x);
            let holder_side = side_far ^ 1;
            let holder = self.edges[e].ends[holder_side];
            if self.edges[e].copy[holder_side] != old {
                continue; // re-seated since
            }
            let fresh = round_units(self.delta[x], self.grid(e));
            self.edges[e].copy[holder_side] = fresh;
            self.copy_refreshes += 1;
            let key = fresh.saturating_add(self.len_units(e));
            self.heaps[holder].push(Reverse((key, e)));
            self.buckets[x].entry(fresh).or_default().push(e);
            if holder != self.root && self.present[holder] && !self.frozen[holder] {
                let entry = queued.entry(holder).or_insert(u64::MAX);
                if *entry > self.delta[holder] {
                    *entry = self.delta[holder];
                    heap.push(Reverse((self.delta[holder], holder)));
                }
            }
        }
    }

    fn freeze_subtree(&mut self, v: VertexId) {
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            if self.frozen[x] {
                continue;
            }
            self.frozen[x] = true;
            self.in_tree[x] = false;
            self.parent[x] = None;
            debug_assert!(self.delta[x] > self.tree_bound || !self.present[x]);
            for i in 0..self.adj[x].len() {
                let e = self.adj[x][i];
                if !self.edges[e].alive {
                    continue;
                }
                let z = self.edges[e].other(x);
                if !self.frozen[z] && self.parent[z] == Some(e) {
                    // Hanging descendants inherited a label above the bound.
                    stack.push(z);
                }
            }
        }
    }

    pub fn delete_edge(&mut self, e: EdgeId) -> Result<(), WsesError> {
        if e >= self.edges.len() || !self.edges[e].alive {
            return Err(WsesError::StaleEdge(e));
        }
        self.edges[e].alive = false;
        self.drop_edge_indexes(e);
        let [u, w] = self.edges[e].ends;
        let child = if self.parent[u] == Some(e) {
            Some(u)
        } else if self.parent[w] == Some(e) {
            Some(w)
        } else {
            None
        };
        if let Some(c) = child {
            self.parent[c] = None;
            self.settle(vec![c]);
        }
        Ok(())
    }

    pub fn delete_edge_between(&mut self, u: VertexId, w: VertexId) -> Result<(), WsesError> {
        let e = self
            .edge_between(u, w)
            .ok_or(WsesError::NoSuchEdge(u, w))?;
        self.delete_edge(e)
    }

    /// Insert an eligible regular edge: integer scaled length in [4, 4D],
    /// both endpoints regular and currently sharing a special neighbor.
    /// Labels do not change; copies start exact.
    pub fn insert_eligible(
        &mut self,
        u: VertexId,
        w: VertexId,
        scaled_len: u64,
    ) -> Result<EdgeId, WsesError> {
        if self.kinds[u] != VertexKind::Regular || self.kinds[w] != VertexKind::Regular {
            return Err(WsesError::Ineligible(u, w));
        }
        let share = self.special_adj[u]
            .iter()
            .any(|s| self.special_adj[w].contains(s));
        if !share {
            return Err(WsesError::Ineligible(u, w));
        }
        debug_assert!(scaled_len >= 4 && scaled_len % 4 == 0);
        let e = self.raw_add_edge(u, w, scaled_len);
        self.edges[e].copy = [self.delta[w], self.delta[u]];
        self.seat_edge(e, 0);
        self.seat_edge(e, 1);
        Ok(e)
    }

    /// Create a twin special vertex adopting `v_c`'s label, heap keys, and
    /// bucket positions, connected to `members` and to `v_c`'s tree parent.
    /// Returns the new vertex id.
    pub fn twin(&mut self, v_c: VertexId, members: &[VertexId]) -> Result<VertexId, WsesError> {
        if self.kinds[v_c] != VertexKind::Special {
            return Err(WsesError::NotSpecial(v_c));
        }
        for &z in members {
            if self.edge_between(v_c, z).is_none() {
                return Err(WsesError::BadMember(z));
            }
        }
        let twin = self.kinds.len();
        self.kinds.push(VertexKind::Special);
        self.present.push(true);
        self.adj.push(Vec::new());
        self.special_adj.push(HashSet::new());
        self.delta.push(self.delta[v_c]);
        self.in_tree.push(self.in_tree[v_c]);
        self.frozen.push(self.frozen[v_c]);
        self.parent.push(None);
        self.heaps.push(BinaryHeap::new());
        self.buckets.push(HashMap::new());

        let parent_edge = self.parent[v_c];
        let parent_vertex = parent_edge.map(|e| self.edges[e].other(v_c));
        let mut attach: Vec<VertexId> = members.to_vec();
        if let Some(p) = parent_vertex {
            if !members.contains(&p) {
                attach.push(p);
            }
        }
        for z in attach {
            let old = self
                .edge_between(v_c, z)
                .expect("member or parent edge of the cluster vertex");
            let side_z = self.edges[old].side(z);
            // z's view of the twin mirrors its view of v_c; the twin's view
            // of z mirrors v_c's. Re-derive if a stale copy slipped behind.
            let mut copy_z_of_twin = self.edges[old].copy[side_z];
            let mut copy_twin_of_z = self.edges[old].copy[side_z ^ 1];
            if copy_z_of_twin < self.delta[v_c] {
                copy_z_of_twin = self.delta[v_c];
            }
            if copy_twin_of_z < self.delta[z] {
                copy_twin_of_z = self.delta[z];
            }
            let e = self.raw_add_edge(z, twin, 1);
            let side_z_new = self.edges[e].side(z);
            self.edges[e].copy[side_z_new] = copy_z_of_twin;
            self.edges[e].copy[side_z_new ^ 1] = copy_twin_of_z;
            self.seat_edge(e, 0);
            self.seat_edge(e, 1);
        }
        if let Some(p) = parent_vertex {
            if self.in_tree[v_c] {
                let e = self.edge_between(twin, p).expect("twin parent edge");
                self.parent[twin] = Some(e);
            }
        }
        Ok(twin)
    }

    /// Split the cluster of `v_c` into `smaller` (list given) and the rest:
    /// twin off the smaller side, then delete the scaffolding edges. `v_c`
    /// keeps representing the larger side; the returned vertex represents the
    /// smaller one.
    pub fn cluster_split(
        &mut self,
        v_c: VertexId,
        smaller: &[VertexId],
    ) -> Result<VertexId, WsesError> {
        let twin = self.twin(v_c, smaller)?;
        let parent_vertex = self.parent[v_c].map(|e| self.edges[e].other(v_c));
        if let Some(p) = parent_vertex {
            if !smaller.contains(&p) {
                self.delete_edge_between(p, twin)?;
            }
        }
        for &z in smaller {
            self.delete_edge_between(v_c, z)?;
        }
        Ok(twin)
    }

    /// Number of live special edges at a regular vertex (audits).
    pub fn special_degree(&self, v: VertexId) -> usize {
        self.special_adj[v].len()
    }

    pub fn n(&self) -> usize {
        self.kinds.len()
    }

    pub fn live_edges(&self) -> impl Iterator<Item = (EdgeId, VertexId, VertexId, u64)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.alive)
            .map(|(i, e)| (i, e.ends[0], e.ends[1], e.scaled_len))
    }

    /// Grid-crossing budget over every edge ever present, mirroring the
    /// update-time accounting: refresh counts stay within this.
    pub fn refresh_budget(&self) -> u64 {
        self.edges
            .iter()
            .map(|e| 4 * (self.tree_bound / e.scaled_len) + 4)
            .sum()
    }

    /// Structural audit used by tests: copies sandwich labels, the parent is
    /// the heap minimum, labels are multiples of eps (trivially true in
    /// units), and tree paths realize their labels.
    pub fn audit(&self) -> Result<(), String> {
        for (i, e) in self.edges.iter().enumerate() {
            if !e.alive {
                continue;
            }
            for side in [0, 1] {
                let far = e.ends[side ^ 1];
                if self.frozen[far] || !self.present[far] {
                    continue;
                }
                let copy = e.copy[side];
                if copy < self.delta[far] {
                    return Err(format!(
                        "edge {i}: copy {copy} fell behind delta({far}) = {}",
                        self.delta[far]
                    ));
                }
                let round = round_units(self.delta[far], e.scaled_len);
                if copy > round && copy != self.delta[far] {
                    return Err(format!(
                        "edge {i}: copy {copy} exceeds ROUND = {round} of delta({far}) = {}",
                        self.delta[far]
                    ));
                }
            }
        }
        for v in 0..self.n() {
            if !self.in_tree[v] || v == self.root {
                continue;
            }
            let e = self.parent[v].ok_or(format!("tree vertex {v} lacks a parent"))?;
            let side = self.edges[e].side(v);
            let expect = self.edges[e].copy[side] + self.len_units(e);
            if self.delta[v] != expect {
                return Err(format!(
                    "vertex {v}: delta {} != parent copy + len {}",
                    self.delta[v], expect
                ));
            }
        }
        Ok(())
    }
}

fn pair_key(u: VertexId, w: VertexId) -> (VertexId, VertexId) {
    (u.min(w), u.max(w))
}

fn snap_k(eps: Rational) -> u64 {
    let p = *eps.numer() as u64;
    let q = *eps.denom() as u64;
    // Snap eps down to 1/k for an integer k > 4.
    (q.div_ceil(p)).max(5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn round_e_examples() {
        let half = Rational::new(1, 2);
        assert_eq!(round_e(Rational::from_integer(5), 4, half), Rational::from_integer(6));
        assert_eq!(round_e(Rational::from_integer(6), 4, half), Rational::from_integer(8));
        assert_eq!(round_e(Rational::from_integer(0), 1, half), half);
    }

    /// Star of a special vertex over three regulars, rooted at a regular.
    #[test]
    fn init_star_exact() {
        // 0,1,2 regular; 3 special joined by quarter edges.
        let kinds = vec![
            VertexKind::Regular,
            VertexKind::Regular,
            VertexKind::Regular,
            VertexKind::Special,
        ];
        let edges = vec![(0, 3, 1), (1, 3, 1), (2, 3, 1)];
        let t = WsesTree::new(kinds, &edges, 0, 10, Rational::new(1, 5)).unwrap();
        let k = t.k();
        assert_eq!(t.delta_units(0), 0);
        assert_eq!(t.delta_units(3), k);
        assert_eq!(t.delta_units(1), 2 * k);
        assert_eq!(t.delta_units(2), 2 * k);
        t.audit().unwrap();
    }

    #[test]
    fn far_vertex_excluded() {
        let kinds = vec![VertexKind::Regular, VertexKind::Regular];
        // Regular edge of original length 100 with bound 10: 400 scaled > 44.
        let edges = vec![(0, 1, 400)];
        let t = WsesTree::new(kinds, &edges, 0, 10, Rational::new(1, 5)).unwrap();
        assert!(!t.is_in_tree(1));
        assert!(matches!(t.query(1), WsesAnswer::Far));
    }

    fn oracle_units(
        n: usize,
        edges: &[(usize, usize, u64)],
        alive: &[bool],
        root: usize,
        k: u64,
    ) -> Vec<u64> {
        let mut g = crate::graph::DynamicGraph::new(n);
        for (i, &(u, w, sl)) in edges.iter().enumerate() {
            if alive[i] {
                g.add_edge(u, w, sl * k).unwrap();
            }
        }
        crate::oracle::dijkstra_all(&g, root)
    }

    fn check_sandwich(t: &WsesTree, dist: &[u64]) {
        let k = t.k();
        for v in 0..t.n() {
            if t.is_in_tree(v) {
                let d = dist[v];
                assert!(d <= t.delta_units(v), "lower bound at {v}");
                assert!(
                    t.delta_units(v) * k <= d * (k + 1),
                    "upper bound at {v}: delta {} dist {d}",
                    t.delta_units(v)
                );
                if let WsesAnswer::InTree { delta_units, path } = t.query(v) {
                    assert!(t.path_len_units(&path) <= delta_units, "path realization");
                } else {
                    panic!("in-tree vertex answered Far");
                }
            } else if dist[v] != u64::MAX {
                // Far certificate: true distance exceeds the bound D.
                assert!(
                    dist[v] > t.tree_bound() / (k + 1) * k,
                    "far certificate at {v}: dist {} bound {}",
                    dist[v],
                    t.tree_bound()
                );
            }
        }
    }

    #[test]
    fn delete_with_alternate_path() {
        // Path edge of length 4 deleted; alternate path of length 6 exists.
        let kinds = vec![VertexKind::Regular; 3];
        let edges = vec![(0, 1, 16), (0, 2, 8), (2, 1, 16)];
        let mut t = WsesTree::new(kinds, &edges, 0, 20, Rational::new(1, 2)).unwrap();
        let k = t.k();
        assert_eq!(t.delta_units(1), 16 * k);
        t.delete_edge(0).unwrap();
        t.audit().unwrap();
        // True distance is now 24 scaled; sandwich must hold.
        assert!(t.delta_units(1) >= 24 * k);
        assert!(t.delta_units(1) * k <= 24 * k * (k + 1));
    }

    #[test]
    fn nontree_deletion_keeps_labels() {
        let kinds = vec![VertexKind::Regular; 3];
        let edges = vec![(0, 1, 4), (0, 2, 4), (1, 2, 20)];
        let mut t = WsesTree::new(kinds, &edges, 0, 20, Rational::new(1, 5)).unwrap();
        let before: Vec<u64> = (0..3).map(|v| t.delta_units(v)).collect();
        t.delete_edge(2).unwrap();
        let after: Vec<u64> = (0..3).map(|v| t.delta_units(v)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn eligible_insert_requires_common_special() {
        let kinds = vec![
            VertexKind::Regular,
            VertexKind::Regular,
            VertexKind::Regular,
            VertexKind::Special,
        ];
        let edges = vec![(0, 3, 1), (1, 3, 1), (0, 2, 4)];
        let mut t = WsesTree::new(kinds, &edges, 0, 10, Rational::new(1, 5)).unwrap();
        // 0 and 1 share special 3.
        let e = t.insert_eligible(0, 1, 8).unwrap();
        assert!(t.edges[e].alive);
        t.audit().unwrap();
        // 1 and 2 share nothing.
        assert_eq!(t.insert_eligible(1, 2, 8), Err(WsesError::Ineligible(1, 2)));
    }

    #[test]
    fn twin_adopts_label_and_split_moves_members() {
        let kinds = vec![
            VertexKind::Regular, // 0 root
            VertexKind::Regular, // 1
            VertexKind::Regular, // 2
            VertexKind::Regular, // 3
            VertexKind::Special, // 4 cluster over 1,2,3
        ];
        let edges = vec![(0, 1, 4), (1, 4, 1), (2, 4, 1), (3, 4, 1)];
        let mut t = WsesTree::new(kinds.clone(), &edges, 0, 20, Rational::new(1, 5)).unwrap();
        // Twin alone adopts the label by construction.
        let dc = t.delta_units(4);
        let tw = t.twin(4, &[3]).unwrap();
        assert_eq!(t.delta_units(tw), dc);
        t.audit().unwrap();

        let mut t = WsesTree::new(kinds, &edges, 0, 20, Rational::new(1, 5)).unwrap();
        let twin = t.cluster_split(4, &[3]).unwrap();
        t.audit().unwrap();
        // The twin now serves member 3 alone; v_c keeps 1 and 2.
        assert!(t.edge_between(twin, 3).is_some());
        assert!(t.edge_between(4, 3).is_none());
        assert!(t.edge_between(4, 1).is_some());
        assert_eq!(t.cluster_split(4, &[9]).err(), Some(WsesError::BadMember(9)));
    }

    fn oracle_from_tree(t: &WsesTree) -> Vec<u64> {
        let mut g = crate::graph::DynamicGraph::new(t.n());
        for (_, u, w, sl) in t.live_edges() {
            g.add_edge(u, w, sl * t.k()).unwrap();
        }
        crate::oracle::dijkstra_all(&g, 0)
    }

    /// Random light graphs under random deletions, twins, splits, and
    /// eligible insertions: after every operation the sandwich and the
    /// structural audit hold.
    #[test]
    fn randomized_sandwich_under_updates() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5D);
        for round in 0..25 {
            let regulars = rng.gen_range(3..18usize);
            let mut kinds = vec![VertexKind::Regular; regulars];
            let mut edges: Vec<(usize, usize, u64)> = Vec::new();
            for u in 0..regulars {
                for w in (u + 1)..regulars {
                    if rng.gen_bool(0.3) {
                        let l = rng.gen_range(1..=6) * 4;
                        edges.push((u, w, l));
                    }
                }
            }
            // A couple of special clusters over random member sets.
            let mut clusters: Vec<(usize, Vec<usize>)> = Vec::new();
            for _ in 0..2 {
                let sv = kinds.len();
                kinds.push(VertexKind::Special);
                let mut members = Vec::new();
                for u in 0..regulars {
                    if rng.gen_bool(0.5) {
                        members.push(u);
                        edges.push((u, sv, 1));
                    }
                }
                if members.len() < 2 {
                    kinds.pop();
                    edges.retain(|&(_, w, _)| w != sv);
                    continue;
                }
                clusters.push((sv, members));
            }
            let eps = if rng.gen_bool(0.5) {
                Rational::new(1, 5)
            } else {
                Rational::new(1, 8)
            };
            let d = rng.gen_range(6..30);
            let mut t = WsesTree::new(kinds.clone(), &edges, 0, d, eps).unwrap();
            check_sandwich(&t, &oracle_from_tree(&t));
            t.audit().unwrap();
            for _step in 0..30 {
                let op = rng.gen_range(0..10);
                if op < 6 {
                    let live: Vec<EdgeId> = t.live_edges().map(|(e, ..)| e).collect();
                    if live.is_empty() {
                        break;
                    }
                    let e = live[rng.gen_range(0..live.len())];
                    t.delete_edge(e).unwrap();
                } else if op < 8 {
                    // Split a random cluster with at least 2 live members.
                    let live_of = |t: &WsesTree, sv: usize, members: &[usize]| -> Vec<usize> {
                        members
                            .iter()
                            .copied()
                            .filter(|&u| t.edge_between(sv, u).is_some())
                            .collect()
                    };
                    if let Some(ci) = (0..clusters.len())
                        .find(|&ci| live_of(&t, clusters[ci].0, &clusters[ci].1).len() >= 2)
                    {
                        let (sv, members) = clusters[ci].clone();
                        let live_members = live_of(&t, sv, &members);
                        let cut = rng.gen_range(1..live_members.len() / 2 + 1);
                        let small: Vec<usize> = live_members[..cut].to_vec();
                        let big: Vec<usize> = live_members[cut..].to_vec();
                        let twin = t.cluster_split(sv, &small).unwrap();
                        clusters[ci] = (sv, big);
                        clusters.push((twin, small));
                    }
                } else {
                    // Insert an eligible edge under a random cluster.
                    if let Some((_, members)) =
                        clusters.iter().find(|(_, m)| m.len() >= 2).cloned()
                    {
                        let u = members[rng.gen_range(0..members.len())];
                        let w = members[rng.gen_range(0..members.len())];
                        if u != w && t.edge_between(u, w).is_none() {
                            let l = rng.gen_range(1..=6) * 4;
                            let _ = t.insert_eligible(u, w, l);
                        }
                    }
                }
                check_sandwich(&t, &oracle_from_tree(&t));
                if let Err(e) = t.audit() {
                    panic!("round {round}: audit failed: {e}");
                }
            }
            // Inspection economy: refreshes bounded by the grid-crossing
            // budget of the edges ever present.
            let budget = t.refresh_budget();
            assert!(t.copy_refreshes <= budget, "refreshes {} > {budget}", t.copy_refreshes);
        }
    }
}
