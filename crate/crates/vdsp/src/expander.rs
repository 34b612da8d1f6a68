//! Cut-matching machinery: the random-projection cut player, the flow-or-cut
//! routing lemmas (vertex and edge versions), witness embedding, sparse-cut
//! search with profit guarantees, and expander trimming.
//!
//! Everything here is pure with respect to the host graph and drives its own
//! randomness through an explicit rng. Every returned cut or path collection
//! can be re-checked by the validators at the bottom of the module; callers
//! run them unconditionally in tests and treat failures as Las Vegas retries.

use rand::Rng;

use crate::graph::SubGraph;
use crate::params::Params;

// ---------------------------------------------------------------------------
// Cut player

/// Random-projection cut player: each round projects the implicit lazy
/// random-walk distribution (a product of half-averaging steps along past
/// matchings) onto a fresh random direction and splits the vertices at the
/// median. Odd vertex counts run two staggered sub-games, one avoiding the
/// last vertex and one avoiding the first, per the standard reduction.
pub struct CutMatching {
    n: usize,
    /// Matchings per sub-game; sub-game 1 is the only one when n is even.
    matchings: [Vec<Vec<(usize, usize)>>; 2],
    round: usize,
    rounds_total: usize,
}

impl CutMatching {
    pub fn new(n: usize, rounds_total: usize) -> Self {
        CutMatching {
            n,
            matchings: [Vec::new(), Vec::new()],
            round: 0,
            rounds_total,
        }
    }

    fn subgame(&self) -> usize {
        if self.n % 2 == 0 || self.round < self.rounds_total.div_ceil(2) {
            0
        } else {
            1
        }
    }

    fn active_vertices(&self) -> Vec<usize> {
        if self.n % 2 == 0 {
            (0..self.n).collect()
        } else if self.subgame() == 0 {
            (0..self.n - 1).collect()
        } else {
            (1..self.n).collect()
        }
    }

    /// Disjoint equal-cardinality subsets for the next round.
    pub fn next_cut(&mut self, rng: &mut impl Rng) -> (Vec<usize>, Vec<usize>) {
        let active = self.active_vertices();
        let mut proj = vec![0.0f64; self.n];
        for &v in &active {
            proj[v] = rng.gen::<f64>() - 0.5;
        }
        for m in &self.matchings[self.subgame()] {
            for &(a, b) in m {
                let avg = (proj[a] + proj[b]) / 2.0;
                proj[a] = avg;
                proj[b] = avg;
            }
        }
        let mut order = active;
        order.sort_by(|&a, &b| proj[a].partial_cmp(&proj[b]).unwrap().then(a.cmp(&b)));
        let half = order.len() / 2;
        (order[..half].to_vec(), order[half..2 * half].to_vec())
    }

    /// Record the matching player's response for the round just played.
    pub fn record_matching(&mut self, m: Vec<(usize, usize)>) {
        let g = self.subgame();
        self.matchings[g].push(m);
        self.round += 1;
    }

    pub fn rounds_played(&self) -> usize {
        self.round
    }

    pub fn all_edges(&self) -> Vec<(usize, usize)> {
        self.matchings
            .iter()
            .flatten()
            .flatten()
            .copied()
            .collect()
    }
}

/// Standalone game length for an `n`-vertex game: `floor(c_KRV log^2 n)`,
/// doubled when n is odd to cover both sub-games.
pub fn standalone_rounds(params: &Params, n: usize) -> usize {
    let ln = (n.max(2) as f64).log2();
    let t = (params.c_krv * ln * ln).floor().max(1.0) as usize;
    if n % 2 == 0 {
        t
    } else {
        2 * t
    }
}

// ---------------------------------------------------------------------------
// Cuts and validators

#[derive(Debug, Clone)]
pub struct VertexCut {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
}

impl VertexCut {
    /// psi = |Y| / (min(|X|,|Z|) + |Y|).
    pub fn sparsity(&self) -> f64 {
        let m = self.x.len().min(self.z.len());
        self.y.len() as f64 / (m + self.y.len()) as f64
    }
}

#[derive(Debug, Clone)]
pub struct EdgeCut {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub crossing: usize,
}

impl EdgeCut {
    pub fn profit(&self) -> usize {
        self.a.len().min(self.b.len())
    }
    pub fn sparsity(&self) -> f64 {
        self.crossing as f64 / self.profit().max(1) as f64
    }
}

/// Structural check: (X,Y,Z) partitions the vertex set and no live edge joins
/// X to Z.
pub fn validate_vertex_cut(g: &SubGraph, cut: &VertexCut) -> Result<(), String> {
    let n = g.n();
    let mut tag = vec![0u8; n];
    for &v in &cut.x {
        tag[v] = 1;
    }
    for &v in &cut.y {
        if tag[v] != 0 {
            return Err(format!("vertex {v} in two parts"));
        }
        tag[v] = 2;
    }
    for &v in &cut.z {
        if tag[v] != 0 {
            return Err(format!("vertex {v} in two parts"));
        }
        tag[v] = 3;
    }
    if tag.iter().any(|&t| t == 0) {
        return Err("cut does not cover the vertex set".into());
    }
    for u in 0..n {
        for &w in &g.adj[u] {
            if (tag[u] == 1 && tag[w] == 3) || (tag[u] == 3 && tag[w] == 1) {
                return Err(format!("edge ({u},{w}) crosses X-Z"));
            }
        }
    }
    Ok(())
}

/// Check the route_or_vertex_cut path side: lengths, endpoint distinctness
/// and membership, and the vertex congestion bound.
pub fn validate_vertex_paths(
    g: &SubGraph,
    paths: &[Vec<usize>],
    a: &[usize],
    b: &[usize],
    ell: u64,
    congestion_bound: u64,
) -> Result<(), String> {
    let in_a: std::collections::HashSet<_> = a.iter().collect();
    let in_b: std::collections::HashSet<_> = b.iter().collect();
    let mut used_a = std::collections::HashSet::new();
    let mut used_b = std::collections::HashSet::new();
    let mut load = vec![0u64; g.n()];
    for p in paths {
        if p.len() < 2 && !(p.len() == 1 && in_a.contains(&p[0]) && in_b.contains(&p[0])) {
            if p.is_empty() {
                return Err("empty path".into());
            }
        }
        if !in_a.contains(&p[0]) || !in_b.contains(p.last().unwrap()) {
            return Err("path endpoints outside A/B".into());
        }
        if !used_a.insert(p[0]) || !used_b.insert(*p.last().unwrap()) {
            return Err("duplicate endpoint".into());
        }
        if (p.len() as u64).saturating_sub(1) > ell {
            return Err(format!("path length {} exceeds {ell}", p.len() - 1));
        }
        for w in p.windows(2) {
            if !g.adj[w[0]].contains(&w[1]) {
                return Err(format!("missing edge ({},{})", w[0], w[1]));
            }
        }
        for &v in p {
            load[v] += 1;
        }
    }
    if let Some(v) = (0..g.n()).find(|&v| load[v] > congestion_bound) {
        return Err(format!(
            "vertex {v} carries {} paths, bound {congestion_bound}",
            load[v]
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Flow-or-cut, vertex version

pub enum VertexRouteResult {
    Paths(Vec<Vec<usize>>),
    Cut(VertexCut),
}

/// Route `|A| - z` vertex-congestion-bounded short paths between A and B in
/// the host graph, or produce a sparse vertex cut. Phases route node-disjoint
/// paths through an ES tree and delete their interiors; a starved phase turns
/// its BFS frontiers into the cut.
pub fn route_or_vertex_cut(
    g: &SubGraph,
    a: &[usize],
    b: &[usize],
    z: usize,
    ell: u64,
    logn: f64,
) -> VertexRouteResult {
    assert_eq!(a.len(), b.len());
    let n = g.n();
    let mut rem_a: Vec<usize> = a.to_vec();
    let mut rem_b: Vec<usize> = b.to_vec();
    let mut all_paths: Vec<Vec<usize>> = Vec::new();
    let max_phases = (ell * ell).max(4) as usize + a.len() + 2;
    for _phase in 0..max_phases {
        if rem_a.len() <= z || rem_a.is_empty() {
            return VertexRouteResult::Paths(all_paths);
        }
        // H = g plus source s joined to A_i and sink t joined to B_i.
        let (s, t) = (n, n + 1);
        let mut edges: Vec<(usize, usize, u64)> = Vec::new();
        for u in 0..n {
            for &w in &g.adj[u] {
                if u < w {
                    edges.push((u, w, 1));
                }
            }
        }
        for &x in &rem_a {
            edges.push((s, x, 1));
        }
        for &x in &rem_b {
            edges.push((x, t, 1));
        }
        let mut es = crate::estree::EsTree::new(n + 2, &edges, s, ell + 1);
        let mut phase_paths: Vec<Vec<usize>> = Vec::new();
        let mut deleted = vec![false; n];
        while es.in_tree(t) {
            let (_, path) = es.query(t);
            let path = path.expect("t in tree");
            let inner: Vec<usize> = path[1..path.len() - 1].to_vec();
            for &v in &inner {
                es.delete_vertex(v);
                deleted[v] = true;
            }
            phase_paths.push(inner);
        }
        let target = ((rem_a.len() as f64 * logn / (ell * ell) as f64).ceil() as usize).max(1);
        if phase_paths.len() >= target {
            let routed_a: std::collections::HashSet<usize> =
                phase_paths.iter().map(|p| p[0]).collect();
            let routed_b: std::collections::HashSet<usize> =
                phase_paths.iter().map(|p| *p.last().unwrap()).collect();
            rem_a.retain(|v| !routed_a.contains(v) && !deleted[*v]);
            rem_b.retain(|v| !routed_b.contains(v) && !deleted[*v]);
            // Vertices of A/B consumed as interiors of other paths cannot be
            // endpoints again; balance the two sides.
            let keep = rem_a.len().min(rem_b.len());
            rem_a.truncate(keep);
            rem_b.truncate(keep);
            all_paths.extend(phase_paths);
            continue;
        }
        // Starved phase: grow frontiers in the surviving graph and cut at the
        // slowest-growing ring.
        let alive: Vec<bool> = (0..n).map(|v| !deleted[v]).collect();
        let half = alive.iter().filter(|&&x| x).count() / 2;
        let neighbor_lists: Vec<&[usize]> = g.adj.iter().map(|v| v.as_slice()).collect();
        let seed_a: Vec<usize> = rem_a.iter().copied().filter(|&v| alive[v]).collect();
        let seed_b: Vec<usize> = rem_b.iter().copied().filter(|&v| alive[v]).collect();
        let la = frontier_layers(n, &neighbor_lists, &alive, &seed_a);
        let lb = frontier_layers(n, &neighbor_lists, &alive, &seed_b);
        let (layers, j) = choose_cut_layer(&la, &lb, half, ell, logn);
        let mut in_x = vec![false; n];
        let mut in_ring = vec![false; n];
        for layer in layers.iter().take(j + 1) {
            for &v in layer {
                in_x[v] = true;
            }
        }
        if let Some(layer) = layers.get(j + 1) {
            for &v in layer {
                in_ring[v] = true;
            }
        }
        let x: Vec<usize> = (0..n).filter(|&v| in_x[v]).collect();
        let y: Vec<usize> = (0..n)
            .filter(|&v| in_ring[v] || deleted[v])
            .collect();
        let zs: Vec<usize> = (0..n)
            .filter(|&v| !in_x[v] && !in_ring[v] && !deleted[v])
            .collect();
        return VertexRouteResult::Cut(VertexCut { x, y, z: zs });
    }
    VertexRouteResult::Paths(all_paths)
}

/// BFS layers from a seed set over the alive subgraph, with a trailing empty
/// layer once growth stalls so the stalled ring is a candidate cut position.
fn frontier_layers(
    n: usize,
    adj: &[&[usize]],
    alive: &[bool],
    seed: &[usize],
) -> Vec<Vec<usize>> {
    let mut level = vec![usize::MAX; n];
    let mut frontier: Vec<usize> = seed.to_vec();
    for &v in &frontier {
        level[v] = 0;
    }
    let mut layers = vec![frontier.clone()];
    let mut j = 0;
    while !frontier.is_empty() && j <= n {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in adj[v] {
                if alive[w] && level[w] == usize::MAX {
                    level[w] = j + 1;
                    next.push(w);
                }
            }
        }
        let stop = next.is_empty();
        layers.push(next.clone());
        frontier = next;
        j += 1;
        if stop {
            break;
        }
    }
    layers
}

/// Pick the side and index of the slowest-growing frontier ring whose prefix
/// stays at most half the graph, preferring rings below the growth threshold
/// `1 + 2 log n / ell` within depth `ell/2`, falling back to the global
/// minimum-growth ring.
fn choose_cut_layer<'a>(
    la: &'a [Vec<usize>],
    lb: &'a [Vec<usize>],
    half: usize,
    ell: u64,
    logn: f64,
) -> (&'a [Vec<usize>], usize) {
    let ring_bound = 1.0 + 2.0 * logn / ell as f64;
    let pick = |layers: &[Vec<usize>]| -> (Option<(usize, f64)>, Option<(usize, f64)>) {
        let mut qualifying: Option<(usize, f64)> = None;
        let mut best: Option<(usize, f64)> = None;
        let mut size = 0usize;
        for j in 0..layers.len().saturating_sub(1) {
            size += layers[j].len();
            if size == 0 {
                break;
            }
            let next_size = size + layers[j + 1].len();
            if next_size > half.max(1) {
                break;
            }
            let ratio = next_size as f64 / size as f64;
            if best.map_or(true, |(_, r)| ratio < r) {
                best = Some((j, ratio));
            }
            let within = (j as u64) <= ell / 2;
            if within && ratio < ring_bound && qualifying.map_or(true, |(_, r)| ratio < r) {
                qualifying = Some((j, ratio));
            }
        }
        (qualifying, best)
    };
    let (qa, ba) = pick(la);
    let (qb, bb) = pick(lb);
    let merge = |x: Option<(usize, f64)>, y: Option<(usize, f64)>| match (x, y) {
        (Some((jx, rx)), Some((jy, ry))) => Some(if rx <= ry {
            (true, jx)
        } else {
            let _ = jy;
            (false, jy)
        }),
        (Some((jx, _)), None) => Some((true, jx)),
        (None, Some((jy, _))) => Some((false, jy)),
        (None, None) => None,
    };
    let choice = merge(qa, qb).or_else(|| merge(ba, bb)).unwrap_or((true, 0));
    if choice.0 {
        (la, choice.1)
    } else {
        (lb, choice.1)
    }
}

// ---------------------------------------------------------------------------
// Flow-or-cut, edge version

pub enum EdgeRouteResult {
    Paths(Vec<Vec<usize>>),
    Cut(EdgeCut),
}

/// Edge-disjoint-per-phase analogue over a multigraph (`n` vertices, edge
/// list with multiplicity): more than `|A| - z` paths of length at most
/// `ell`, or an edge cut whose sparsity is about `4 log^4 n / ell`.
pub fn route_or_edge_cut(
    n: usize,
    multi_edges: &[(usize, usize)],
    a: &[usize],
    b: &[usize],
    z: usize,
    ell: u64,
    logn: f64,
) -> EdgeRouteResult {
    assert_eq!(a.len(), b.len());
    let mut rem_a: Vec<usize> = a.to_vec();
    let mut rem_b: Vec<usize> = b.to_vec();
    let mut all_paths: Vec<Vec<usize>> = Vec::new();
    let max_phases = (ell * ell).max(4) as usize + a.len() + 2;
    for _phase in 0..max_phases {
        if rem_a.len() < z.max(1) || rem_a.is_empty() {
            return EdgeRouteResult::Paths(all_paths);
        }
        let (s, t) = (n, n + 1);
        let mut edges: Vec<(usize, usize, u64)> =
            multi_edges.iter().map(|&(u, w)| (u, w, 1)).collect();
        let first_sa = edges.len();
        for &x in &rem_a {
            edges.push((s, x, 1));
        }
        for &x in &rem_b {
            edges.push((x, t, 1));
        }
        let _ = first_sa;
        let mut es = crate::estree::EsTree::new(n + 2, &edges, s, ell + 2);
        let mut phase_paths: Vec<Vec<usize>> = Vec::new();
        let mut edge_alive = vec![true; edges.len()];
        while es.in_tree(t) {
            let (_, pe) = es.query_with_edges(t);
            let (path, eids) = pe.expect("t in tree");
            for &e in &eids {
                es.delete_edge(e).unwrap();
                edge_alive[e] = false;
            }
            phase_paths.push(path[1..path.len() - 1].to_vec());
        }
        let target =
            ((rem_a.len() as f64 * logn.powi(3) / (ell * ell) as f64).ceil() as usize).max(1);
        if phase_paths.len() >= target {
            let routed_a: std::collections::HashSet<usize> =
                phase_paths.iter().map(|p| p[0]).collect();
            let routed_b: std::collections::HashSet<usize> =
                phase_paths.iter().map(|p| *p.last().unwrap()).collect();
            rem_a.retain(|v| !routed_a.contains(v));
            rem_b.retain(|v| !routed_b.contains(v));
            all_paths.extend(phase_paths);
            continue;
        }
        // Starved phase: frontier growth over surviving edges.
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, &(u, w)) in multi_edges.iter().enumerate() {
            if edge_alive[i] {
                adj[u].push(w);
                adj[w].push(u);
            }
        }
        let sa: Vec<usize> = rem_a
            .iter()
            .copied()
            .filter(|&v| phase_paths.iter().all(|p| p[0] != v))
            .collect();
        let sb: Vec<usize> = rem_b
            .iter()
            .copied()
            .filter(|&v| phase_paths.iter().all(|p| *p.last().unwrap() != v))
            .collect();
        let alive = vec![true; n];
        let neighbor_lists: Vec<&[usize]> = adj.iter().map(|v| v.as_slice()).collect();
        let la = frontier_layers(n, &neighbor_lists, &alive, &sa);
        let lb = frontier_layers(n, &neighbor_lists, &alive, &sb);
        let (layers, j) = choose_cut_layer(&la, &lb, n / 2, ell, logn);
        let mut in_x = vec![false; n];
        for layer in layers.iter().take(j + 1) {
            for &v in layer {
                in_x[v] = true;
            }
        }
        let x: Vec<usize> = (0..n).filter(|&v| in_x[v]).collect();
        let yv: Vec<usize> = (0..n).filter(|&v| !in_x[v]).collect();
        if x.is_empty() || yv.is_empty() {
            // Degenerate instance; report whatever paths were found.
            return EdgeRouteResult::Paths(all_paths);
        }
        let crossing = multi_edges
            .iter()
            .filter(|&&(u, w)| in_x[u] != in_x[w])
            .count();
        return EdgeRouteResult::Cut(EdgeCut { a: x, b: yv, crossing });
    }
    EdgeRouteResult::Paths(all_paths)
}

// ---------------------------------------------------------------------------
// Witness embedding

/// A sparse near-expander embedded into a host graph with short
/// low-congestion paths. Local vertex ids match the host SubGraph it was
/// built over.
#[derive(Debug, Clone)]
pub struct WitnessGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub alive: Vec<bool>,
    /// Embedding path for each edge, as host-local vertices from a to b.
    pub emb: Vec<Vec<usize>>,
    pub adj: Vec<Vec<usize>>,
}

impl WitnessGraph {
    pub fn new(n: usize) -> Self {
        WitnessGraph {
            n,
            edges: Vec::new(),
            alive: Vec::new(),
            emb: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize, emb: Vec<usize>) {
        let id = self.edges.len();
        self.edges.push((a, b));
        self.alive.push(true);
        self.emb.push(emb);
        self.adj[a].push(id);
        self.adj[b].push(id);
    }

    pub fn live_pairs(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .zip(&self.alive)
            .filter(|(_, &al)| al)
            .map(|(&e, _)| e)
            .collect()
    }

    pub fn live_degree(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|&&e| self.alive[e]).count()
    }

    /// Per-host-vertex number of embedding paths through it.
    pub fn path_load(&self) -> Vec<u64> {
        let mut load = vec![0u64; self.n];
        for (i, p) in self.emb.iter().enumerate() {
            if self.alive[i] {
                for &v in p {
                    load[v] += 1;
                }
            }
        }
        load
    }

    /// Restrict to a vertex subset: edges with both ends inside survive.
    pub fn induced_pairs(&self, keep: &[bool]) -> Vec<(usize, usize)> {
        self.live_pairs()
            .into_iter()
            .filter(|&(a, b)| keep[a] && keep[b])
            .collect()
    }
}

pub enum EmbedResult {
    Witness(WitnessGraph),
    Cut(VertexCut),
}

/// Run the cut-matching game against the vertex router: either an embedded
/// witness whose balanced cuts are all large (w.h.p.), or a sparse
/// almost-balanced vertex cut of the host. Fake edges are stripped from the
/// returned witness.
pub fn embed_witness_or_cut(
    g: &SubGraph,
    z: usize,
    ell: u64,
    rounds: usize,
    logn: f64,
    rng: &mut impl Rng,
) -> EmbedResult {
    let n = g.n();
    let mut game = CutMatching::new(n, rounds);
    let mut witness = WitnessGraph::new(n);
    for _round in 0..rounds {
        let (aa, bb) = game.next_cut(rng);
        if aa.is_empty() {
            game.record_matching(Vec::new());
            continue;
        }
        match route_or_vertex_cut(g, &aa, &bb, z, ell, logn) {
            VertexRouteResult::Cut(cut) => return EmbedResult::Cut(cut),
            VertexRouteResult::Paths(paths) => {
                let mut matched = Vec::new();
                let mut used_a = vec![false; n];
                let mut used_b = vec![false; n];
                for p in &paths {
                    let (pa, pb) = (p[0], *p.last().unwrap());
                    witness.add_edge(pa, pb, p.clone());
                    matched.push((pa, pb));
                    used_a[pa] = true;
                    used_b[pb] = true;
                }
                // Fake edges pair the unrouted remainder arbitrarily; they
                // join the game's graph but not the witness.
                let left: Vec<usize> = aa.iter().copied().filter(|&v| !used_a[v]).collect();
                let right: Vec<usize> = bb.iter().copied().filter(|&v| !used_b[v]).collect();
                for (x, y) in left.into_iter().zip(right) {
                    matched.push((x, y));
                }
                game.record_matching(matched);
            }
        }
    }
    EmbedResult::Witness(witness)
}

// ---------------------------------------------------------------------------
// Sparse cuts of witnesses and trimming

pub enum SparseCutResult {
    Cut(EdgeCut),
    /// With high probability every alpha^3-sparse cut has profit at most
    /// `profit_bound`; `claimed_expansion` records the certified bound.
    Certificate {
        claimed_expansion: f64,
        profit_bound: f64,
    },
}

/// Either an alpha-sparse cut of profit at least z in the multigraph, or a
/// certificate bounding the profit of every alpha^3-sparse cut.
pub fn sparse_cut_profit_or_witness(
    n: usize,
    multi_edges: &[(usize, usize)],
    active: &[usize],
    alpha: f64,
    z: usize,
    rounds: usize,
    logn: f64,
    rng: &mut impl Rng,
) -> SparseCutResult {
    debug_assert!(alpha > 0.0);
    let ell = ((4.0 * logn.powi(4) / alpha).ceil() as u64).max(3);
    let zp = 2 * z;
    // Play on the active vertices only; ids stay host-local via remapping.
    let local_of: std::collections::HashMap<usize, usize> =
        active.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let local_edges: Vec<(usize, usize)> = multi_edges
        .iter()
        .filter_map(|&(u, w)| Some((*local_of.get(&u)?, *local_of.get(&w)?)))
        .collect();
    let na = active.len();
    let mut game = CutMatching::new(na, rounds);
    for _round in 0..rounds {
        let (aa, bb) = game.next_cut(rng);
        if aa.is_empty() {
            game.record_matching(Vec::new());
            continue;
        }
        match route_or_edge_cut(na, &local_edges, &aa, &bb, zp, ell, logn) {
            EdgeRouteResult::Cut(cut) => {
                return SparseCutResult::Cut(EdgeCut {
                    a: cut.a.iter().map(|&i| active[i]).collect(),
                    b: cut.b.iter().map(|&i| active[i]).collect(),
                    crossing: cut.crossing,
                });
            }
            EdgeRouteResult::Paths(paths) => {
                let mut matched = Vec::new();
                let mut used_a = vec![false; na];
                let mut used_b = vec![false; na];
                for p in &paths {
                    matched.push((p[0], *p.last().unwrap()));
                    used_a[p[0]] = true;
                    used_b[*p.last().unwrap()] = true;
                }
                let left: Vec<usize> = aa.iter().copied().filter(|&v| !used_a[v]).collect();
                let right: Vec<usize> = bb.iter().copied().filter(|&v| !used_b[v]).collect();
                for (x, y) in left.into_iter().zip(right) {
                    matched.push((x, y));
                }
                game.record_matching(matched);
            }
        }
    }
    let _ = n;
    SparseCutResult::Certificate {
        claimed_expansion: alpha.powi(3),
        profit_bound: 8.0 * z as f64 * (rounds.max(1) as f64),
    }
}

/// z = 1 specialization: an alpha-sparse cut, or a certificate that the graph
/// is an alpha^3-expander.
pub fn sparse_cut_or_expander(
    n: usize,
    multi_edges: &[(usize, usize)],
    active: &[usize],
    alpha: f64,
    rounds: usize,
    logn: f64,
    rng: &mut impl Rng,
) -> SparseCutResult {
    sparse_cut_profit_or_witness(n, multi_edges, active, alpha, 1, rounds, logn, rng)
}

#[derive(Debug)]
pub struct TrimReport {
    pub kept: Vec<usize>,
    pub certified_expansion: f64,
    pub iterations: usize,
}

/// Trim a witness that satisfies the balanced-cut property down to an
/// expander: iteratively cut sparse pieces off, with the phase schedule
/// alpha_{i+1} = alpha_i^3, z_{i+1} = z_i / x, keeping at least a
/// (1 - 8/log n) fraction of the vertices.
pub fn trim_to_expander(
    w: &WitnessGraph,
    params: &Params,
    rng: &mut impl Rng,
) -> Result<TrimReport, String> {
    let n_check = w.n;
    let logn = params.log_n();
    let rounds = params.cm_rounds;
    let mut active: Vec<usize> = (0..w.n)
        .filter(|&v| w.live_degree(v) > 0 || w.n == 1)
        .collect();
    if active.is_empty() {
        active = (0..w.n).collect();
    }
    let floor = ((1.0 - 8.0 / logn).max(0.0) * active.len() as f64).floor() as usize;
    let mut alpha = params.trim_alpha1;
    let mut zc = (8.0 * active.len() as f64 / logn).ceil() as usize;
    let x = params.trim_x;
    let mut iterations = 0;
    let mut keep_mask = vec![false; w.n];
    for &v in &active {
        keep_mask[v] = true;
    }
    loop {
        let final_phase = ((zc as f64) / x) < 1.0;
        let zp = if final_phase {
            1
        } else {
            (((zc as f64 / x) / (8.0 * rounds as f64)).ceil() as usize).max(1)
        };
        let mut progress = true;
        while progress {
            iterations += 1;
            if iterations > 64 * (x.ceil() as usize + 2) * rounds.max(1) {
                return Err("trimming failed to converge".into());
            }
            let edges = w.induced_pairs(&keep_mask);
            let act: Vec<usize> = (0..w.n).filter(|&v| keep_mask[v]).collect();
            let res = if final_phase {
                sparse_cut_or_expander(w.n, &edges, &act, alpha, rounds, logn, rng)
            } else {
                sparse_cut_profit_or_witness(w.n, &edges, &act, alpha, zp, rounds, logn, rng)
            };
            match res {
                SparseCutResult::Cut(cut) => {
                    let drop = if cut.a.len() >= cut.b.len() { &cut.b } else { &cut.a };
                    for &v in drop {
                        keep_mask[v] = false;
                    }
                    let kept = keep_mask.iter().filter(|&&k| k).count();
                    if kept < floor {
                        return Err(format!(
                            "trimmed below the size floor: {kept} < {floor}"
                        ));
                    }
                }
                SparseCutResult::Certificate {
                    claimed_expansion, ..
                } => {
                    if final_phase {
                        let kept: Vec<usize> =
                            (0..w.n).filter(|&v| keep_mask[v]).collect();
                        let _ = n_check;
                        return Ok(TrimReport {
                            kept,
                            certified_expansion: claimed_expansion,
                            iterations,
                        });
                    }
                    progress = false;
                }
            }
        }
        alpha = alpha.powi(3).max(f64::MIN_POSITIVE);
        zc = ((zc as f64) / x).floor() as usize;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DynamicGraph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn clique(n: usize) -> SubGraph {
        let mut g = DynamicGraph::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v, 1).unwrap();
            }
        }
        let verts: Vec<usize> = (0..n).collect();
        SubGraph::induced(&g, &verts)
    }

    #[test]
    fn cut_player_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut game = CutMatching::new(2, 4);
        let (y, z) = game.next_cut(&mut rng);
        assert_eq!(y.len(), 1);
        assert_eq!(z.len(), 1);
        assert_ne!(y[0], z[0]);
        for n in [5usize, 8, 13] {
            let mut game = CutMatching::new(n, 8);
            for _ in 0..8 {
                let (y, z) = game.next_cut(&mut rng);
                assert_eq!(y.len(), z.len());
                assert!(y.iter().all(|v| !z.contains(v)));
                let m: Vec<(usize, usize)> = y.iter().copied().zip(z.iter().copied()).collect();
                game.record_matching(m);
            }
        }
    }

    #[test]
    fn cut_player_builds_expander_with_honest_matcher() {
        // Acceptance-style check at small N: the union of matchings is a
        // 1/2-expander in nearly all seeded runs.
        for n in [8usize, 12, 16] {
            let mut ok = 0;
            for seed in 0..100u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let params = Params::desk(n, crate::params::Rational::new(1, 5));
                let rounds = standalone_rounds(&params, n);
                let mut game = CutMatching::new(n, rounds);
                for _ in 0..rounds {
                    let (y, z) = game.next_cut(&mut rng);
                    let m: Vec<(usize, usize)> =
                        y.iter().copied().zip(z.iter().copied()).collect();
                    game.record_matching(m);
                }
                let edges = game.all_edges();
                if crate::oracle::check_expander(n, &edges, 0.5, 18).unwrap() {
                    ok += 1;
                }
            }
            assert!(ok >= 95, "N={n}: only {ok}/100 runs gave a 1/2-expander");
        }
    }

    #[test]
    fn route_k2k_perfect_matching() {
        let g = clique(8);
        let a = vec![0, 1, 2, 3];
        let b = vec![4, 5, 6, 7];
        match route_or_vertex_cut(&g, &a, &b, 0, 4, 3.0) {
            VertexRouteResult::Paths(p) => {
                assert_eq!(p.len(), 4);
                validate_vertex_paths(&g, &p, &a, &b, 4, 16).unwrap();
            }
            VertexRouteResult::Cut(_) => panic!("clique must route"),
        }
    }

    #[test]
    fn route_disconnected_gives_cut() {
        // Two cliques with no connection: A in one, B in the other.
        let mut g = DynamicGraph::new(8);
        for u in 0..4 {
            for v in (u + 1)..4 {
                g.add_edge(u, v, 1).unwrap();
                g.add_edge(u + 4, v + 4, 1).unwrap();
            }
        }
        let verts: Vec<usize> = (0..8).collect();
        let sub = SubGraph::induced(&g, &verts);
        match route_or_vertex_cut(&sub, &[0, 1], &[4, 5], 0, 4, 3.0) {
            VertexRouteResult::Cut(cut) => {
                validate_vertex_cut(&sub, &cut).unwrap();
                assert!(cut.y.is_empty());
                assert!(cut.x.len() >= 2 && cut.z.len() >= 2);
            }
            VertexRouteResult::Paths(_) => panic!("no route exists"),
        }
    }

    #[test]
    fn embed_on_clique_yields_witness() {
        let g = clique(12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        match embed_witness_or_cut(&g, 1, 6, 12, 3.58, &mut rng) {
            EmbedResult::Witness(w) => {
                // Every edge's embedding joins its endpoints inside the host.
                for (i, &(a, b)) in w.edges.iter().enumerate() {
                    let p = &w.emb[i];
                    assert_eq!(p[0], a);
                    assert_eq!(*p.last().unwrap(), b);
                    for win in p.windows(2) {
                        assert!(g.adj[win[0]].contains(&win[1]));
                    }
                }
                assert!((0..w.n).all(|v| w.live_degree(v) <= 12));
                // Congestion bounded by rounds * ell^2.
                let load = w.path_load();
                assert!(load.iter().all(|&l| l <= 12 * 36));
            }
            EmbedResult::Cut(_) => panic!("clique has no balanced sparse cut"),
        }
    }

    #[test]
    fn embed_on_dumbbell_yields_cut() {
        // Two 8-cliques joined through a single middle vertex.
        let mut g = DynamicGraph::new(17);
        for u in 0..8 {
            for v in (u + 1)..8 {
                g.add_edge(u, v, 1).unwrap();
                g.add_edge(u + 8, v + 8, 1).unwrap();
            }
        }
        g.add_edge(0, 16, 1).unwrap();
        g.add_edge(8, 16, 1).unwrap();
        let verts: Vec<usize> = (0..17).collect();
        let sub = SubGraph::induced(&g, &verts);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut saw_cut = false;
        for _ in 0..4 {
            if let EmbedResult::Cut(cut) = embed_witness_or_cut(&sub, 0, 4, 10, 4.09, &mut rng) {
                validate_vertex_cut(&sub, &cut).unwrap();
                assert!(cut.y.len() <= 2, "separator through the middle");
                saw_cut = true;
                break;
            }
        }
        assert!(saw_cut, "dumbbell should not route everything at ell=4");
    }

    #[test]
    fn sparse_cut_finds_barbell_bridge() {
        // Two K5s joined by one edge, as a multigraph.
        let mut edges = Vec::new();
        for u in 0..5 {
            for v in (u + 1)..5 {
                edges.push((u, v));
                edges.push((u + 5, v + 5));
            }
        }
        edges.push((0, 5));
        let active: Vec<usize> = (0..10).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        match sparse_cut_profit_or_witness(10, &edges, &active, 0.25, 1, 10, 3.33, &mut rng) {
            SparseCutResult::Cut(cut) => {
                assert!(cut.profit() >= 1);
                assert!(cut.sparsity() <= 0.25 + 1e-9);
                assert_eq!(cut.crossing, 1);
            }
            SparseCutResult::Certificate { .. } => panic!("barbell has a 1/4-sparse cut"),
        }
    }

    #[test]
    fn expander_gets_certificate_checked_by_enumeration() {
        // K10 as a multigraph: no sparse cut at any small alpha.
        let mut edges = Vec::new();
        for u in 0..10 {
            for v in (u + 1)..10 {
                edges.push((u, v));
            }
        }
        let active: Vec<usize> = (0..10).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        match sparse_cut_or_expander(10, &edges, &active, 0.25, 10, 3.33, &mut rng) {
            SparseCutResult::Certificate {
                claimed_expansion, ..
            } => {
                assert!(
                    crate::oracle::check_expander(10, &edges, claimed_expansion, 18).unwrap(),
                    "certificate claim {claimed_expansion} must hold"
                );
            }
            SparseCutResult::Cut(c) => panic!("K10 yielded a cut of sparsity {}", c.sparsity()),
        }
    }

    #[test]
    fn trim_keeps_expander_whole_and_drops_pendants() {
        let params = Params::desk(64, crate::params::Rational::new(1, 5));
        // Witness = K8 plus a pendant path of 1 vertex within profit budget.
        let mut w = WitnessGraph::new(9);
        for u in 0..8 {
            for v in (u + 1)..8 {
                w.add_edge(u, v, vec![u, v]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let r = trim_to_expander(&w, &params, &mut rng).unwrap();
        assert_eq!(r.kept.len(), 8, "expander kept whole");
        assert!(
            crate::oracle::check_expander(
                8,
                &w.induced_pairs(&{
                    let mut k = vec![false; 9];
                    for &v in &r.kept {
                        k[v] = true;
                    }
                    k
                })
                .iter()
                .map(|&(a, b)| (a, b))
                .collect::<Vec<_>>(),
                r.certified_expansion,
                18
            )
            .unwrap()
        );
        // Now a K8 with one pendant vertex attached by a single edge.
        let mut w2 = WitnessGraph::new(9);
        for u in 0..8 {
            for v in (u + 1)..8 {
                w2.add_edge(u, v, vec![u, v]);
            }
        }
        w2.add_edge(0, 8, vec![0, 8]);
        let r2 = trim_to_expander(&w2, &params, &mut rng).unwrap();
        assert!(r2.kept.len() >= 8, "at most the pendant is trimmed");
    }
}
