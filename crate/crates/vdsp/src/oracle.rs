//! Brute-force references used by tests and by the Las Vegas validation
//! paths. These share no code with the structures they check: plain Dijkstra
//! and BFS over adjacency snapshots, augmenting-path max flow, and exhaustive
//! cut enumeration with hard size caps.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId, INF};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance size {0} exceeds the oracle cap {1}")]
    TooLarge(usize, usize),
}

/// Textbook Dijkstra from `s`; `INF` marks unreachable vertices.
pub fn dijkstra_all(g: &DynamicGraph, s: VertexId) -> Vec<u64> {
    let mut dist = vec![INF; g.n()];
    if !g.is_alive(s) {
        return dist;
    }
    dist[s] = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, s)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for (u, e) in g.neighbors(v) {
            let nd = d + g.edge(e).len;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Reverse((nd, u)));
            }
        }
    }
    dist
}

/// BFS hop distances from `s`, ignoring lengths.
pub fn bfs_hops(g: &DynamicGraph, s: VertexId) -> Vec<u64> {
    let mut dist = vec![INF; g.n()];
    if !g.is_alive(s) {
        return dist;
    }
    dist[s] = 0;
    let mut q = VecDeque::new();
    q.push_back(s);
    while let Some(v) = q.pop_front() {
        for (u, _) in g.neighbors(v) {
            if dist[u] == INF {
                dist[u] = dist[v] + 1;
                q.push_back(u);
            }
        }
    }
    dist
}

/// Exact maximum vertex-capacitated s-t flow via the standard vertex split
/// into a directed edge-capacitated network, solved by augmenting paths with
/// exact rational arithmetic. Capacities of `s` and `t` are ignored.
pub fn exact_max_flow(
    g: &DynamicGraph,
    caps: &[BigRational],
    s: VertexId,
    t: VertexId,
    size_cap: usize,
) -> Result<BigRational, OracleError> {
    if g.n() > size_cap {
        return Err(OracleError::TooLarge(g.n(), size_cap));
    }
    // Nodes: v_in = 2v, v_out = 2v+1. Edge (v_in -> v_out) with cap c(v)
    // (infinite for s, t); each undirected edge (u,v) gives u_out -> v_in and
    // v_out -> u_in with effectively infinite capacity.
    let n = g.n();
    let big = {
        let mut sum = BigRational::from_integer(BigInt::from(1));
        for c in caps {
            sum += c;
        }
        sum * BigRational::from_integer(BigInt::from(4))
    };
    let mut arcs: Vec<(usize, usize, BigRational)> = Vec::new();
    let mut head: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
    let push_arc = |arcs: &mut Vec<(usize, usize, BigRational)>,
                        head: &mut Vec<Vec<usize>>,
                        a: usize,
                        b: usize,
                        c: BigRational| {
        head[a].push(arcs.len());
        arcs.push((a, b, c));
        head[b].push(arcs.len());
        arcs.push((b, a, BigRational::zero()));
    };
    for v in g.vertices() {
        let c = if v == s || v == t { big.clone() } else { caps[v].clone() };
        push_arc(&mut arcs, &mut head, 2 * v, 2 * v + 1, c);
    }
    for e in g.live_edge_ids() {
        let ed = g.edge(e);
        push_arc(&mut arcs, &mut head, 2 * ed.u + 1, 2 * ed.v, big.clone());
        push_arc(&mut arcs, &mut head, 2 * ed.v + 1, 2 * ed.u, big.clone());
    }
    let (src, dst) = (2 * s, 2 * t + 1);
    let mut flow = BigRational::zero();
    loop {
        // BFS for an augmenting path in the residual network.
        let mut pred: Vec<Option<usize>> = vec![None; 2 * n];
        let mut q = VecDeque::new();
        q.push_back(src);
        pred[src] = Some(usize::MAX);
        while let Some(v) = q.pop_front() {
            if v == dst {
                break;
            }
            for &a in &head[v] {
                let (from, to, ref cap) = arcs[a];
                if from == v && pred[to].is_none() && cap > &BigRational::zero() {
                    pred[to] = Some(a);
                    q.push_back(to);
                }
            }
        }
        if pred[dst].is_none() {
            break;
        }
        let mut bottleneck: Option<BigRational> = None;
        let mut v = dst;
        while v != src {
            let a = pred[v].unwrap();
            let cap = arcs[a].2.clone();
            bottleneck = Some(match bottleneck {
                None => cap,
                Some(b) => b.min(cap),
            });
            v = arcs[a].0;
        }
        let b = bottleneck.unwrap();
        let mut v = dst;
        while v != src {
            let a = pred[v].unwrap();
            arcs[a].2 -= &b;
            arcs[a ^ 1].2 += &b;
            v = arcs[a].0;
        }
        flow += b;
    }
    Ok(flow)
}

/// Exhaustive vertex sparsest cut: minimize `|X| / (min(|A|,|B|) + |X|)` over
/// all partitions `(A, X, B)` with no A-B edge and `A, B` nonempty. Returns
/// the sparsity and a witness `(a_side, x, b_side)`.
pub fn brute_sparsest_cut(
    g: &DynamicGraph,
    size_cap: usize,
) -> Result<(BigRational, (Vec<VertexId>, Vec<VertexId>, Vec<VertexId>)), OracleError> {
    let verts: Vec<VertexId> = g.vertices().collect();
    let n = verts.len();
    if n > size_cap {
        return Err(OracleError::TooLarge(n, size_cap));
    }
    let mut best: Option<(BigRational, (Vec<VertexId>, Vec<VertexId>, Vec<VertexId>))> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<VertexId> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if x.len() == n {
            continue;
        }
        // Components of g minus X, then balance them into two groups.
        let mut in_x = vec![false; g.n()];
        for &i in &x {
            in_x[verts[i]] = true;
        }
        let mut comp = vec![usize::MAX; g.n()];
        let mut comps: Vec<Vec<VertexId>> = Vec::new();
        for &v in &verts {
            if in_x[v] || comp[v] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut group = vec![v];
            comp[v] = id;
            let mut q = VecDeque::from([v]);
            while let Some(w) = q.pop_front() {
                for (u, _) in g.neighbors(w) {
                    if !in_x[u] && comp[u] == usize::MAX {
                        comp[u] = id;
                        group.push(u);
                        q.push_back(u);
                    }
                }
            }
            comps.push(group);
        }
        if comps.len() < 2 {
            continue;
        }
        // Partition components to maximize the smaller side.
        let sizes: Vec<usize> = comps.iter().map(|c| c.len()).collect();
        let total: usize = sizes.iter().sum();
        let mut best_balance = (0usize, 0u64);
        for split in 0u64..(1 << comps.len()) {
            let a: usize = (0..comps.len())
                .filter(|i| split >> i & 1 == 1)
                .map(|i| sizes[i])
                .sum();
            let b = total - a;
            if a == 0 || b == 0 {
                continue;
            }
            if a.min(b) > best_balance.0 {
                best_balance = (a.min(b), split);
            }
        }
        if best_balance.0 == 0 {
            continue;
        }
        let psi = BigRational::new(
            BigInt::from(x.len()),
            BigInt::from(best_balance.0 + x.len()),
        );
        let better = match &best {
            None => true,
            Some((b, _)) => psi < *b,
        };
        if better {
            let split = best_balance.1;
            let mut a_side = Vec::new();
            let mut b_side = Vec::new();
            for (i, c) in comps.iter().enumerate() {
                if split >> i & 1 == 1 {
                    a_side.extend_from_slice(c);
                } else {
                    b_side.extend_from_slice(c);
                }
            }
            let x_host: Vec<VertexId> = x.iter().map(|&i| verts[i]).collect();
            best = Some((psi, (a_side, x_host, b_side)));
        }
    }
    // No separator at all (complete graph): sparsity 1 with the trivial cut.
    Ok(best.unwrap_or_else(|| {
        (
            BigRational::from_integer(BigInt::from(1)),
            (Vec::new(), verts.clone(), Vec::new()),
        )
    }))
}

/// Exhaustive alpha-expander check over a multigraph given as an edge list
/// with multiplicities: every cut `(A, B)` must satisfy
/// `|E(A,B)| >= alpha * min(|A|, |B|)`. Cap 18 vertices.
pub fn check_expander(
    n: usize,
    edges: &[(usize, usize)],
    alpha: f64,
    size_cap: usize,
) -> Result<bool, OracleError> {
    if n > size_cap.min(18) {
        return Err(OracleError::TooLarge(n, size_cap.min(18)));
    }
    if n <= 1 {
        return Ok(true);
    }
    for mask in 1u32..(1 << (n - 1)) {
        let a = mask.count_ones() as usize;
        let min_side = a.min(n - a);
        let crossing = edges
            .iter()
            .filter(|&&(u, v)| (mask >> u & 1) != (mask >> v & 1))
            .count();
        if (crossing as f64) < alpha * min_side as f64 - 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_graph;
    use num_traits::One;

    fn k(n: usize) -> DynamicGraph {
        let mut g = DynamicGraph::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v, 1).unwrap();
            }
        }
        g
    }

    #[test]
    fn dijkstra_path_graph() {
        let g = load_graph("3 2\n0 1 1\n1 2 1").unwrap();
        assert_eq!(dijkstra_all(&g, 0), vec![0, 1, 2]);
    }

    #[test]
    fn dijkstra_unreachable() {
        let g = load_graph("3 1\n0 1 1").unwrap();
        assert_eq!(dijkstra_all(&g, 0)[2], INF);
    }

    #[test]
    fn dijkstra_matches_bfs_on_unit_lengths() {
        let g = load_graph("5 5\n0 1 1\n1 2 1\n2 3 1\n3 4 1\n0 4 1").unwrap();
        assert_eq!(dijkstra_all(&g, 0), bfs_hops(&g, 0));
    }

    #[test]
    fn max_flow_single_path() {
        let g = load_graph("3 2\n0 1 1\n1 2 1").unwrap();
        let caps = vec![
            BigRational::from_integer(BigInt::from(100)),
            BigRational::from_integer(BigInt::from(5)),
            BigRational::from_integer(BigInt::from(100)),
        ];
        let f = exact_max_flow(&g, &caps, 0, 2, 60).unwrap();
        assert_eq!(f, BigRational::from_integer(BigInt::from(5)));
    }

    #[test]
    fn max_flow_disjoint_paths() {
        // s = 0, t = 5, three internal disjoint 2-vertex paths with caps 1.
        let g = load_graph("8 9\n0 1 1\n1 2 1\n2 5 1\n0 3 1\n3 4 1\n4 5 1\n0 6 1\n6 7 1\n7 5 1")
            .unwrap();
        let caps: Vec<BigRational> = (0..8).map(|_| BigRational::one()).collect();
        let f = exact_max_flow(&g, &caps, 0, 5, 60).unwrap();
        assert_eq!(f, BigRational::from_integer(BigInt::from(3)));
    }

    #[test]
    fn sparsest_cut_k4_is_one() {
        let (psi, _) = brute_sparsest_cut(&k(4), 14).unwrap();
        assert_eq!(psi, BigRational::one());
    }

    #[test]
    fn sparsest_cut_p5_is_one_third() {
        let g = load_graph("5 4\n0 1 1\n1 2 1\n2 3 1\n3 4 1").unwrap();
        let (psi, (_, x, _)) = brute_sparsest_cut(&g, 14).unwrap();
        assert_eq!(psi, BigRational::new(BigInt::from(1), BigInt::from(3)));
        assert_eq!(x, vec![2]);
    }

    #[test]
    fn sparsest_cut_star() {
        let g = load_graph("5 4\n0 1 1\n0 2 1\n0 3 1\n0 4 1").unwrap();
        let (psi, _) = brute_sparsest_cut(&g, 14).unwrap();
        assert_eq!(psi, BigRational::new(BigInt::from(1), BigInt::from(3)));
    }

    #[test]
    fn expander_checks() {
        let k4: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        assert!(check_expander(4, &k4, 1.0, 18).unwrap());
        let p4 = vec![(0, 1), (1, 2), (2, 3)];
        assert!(!check_expander(4, &p4, 1.0, 18).unwrap());
        // Worst C6 cut is the balanced 3|3 arc split: 2 crossing edges, so the
        // cycle is an alpha-expander exactly for alpha <= 2/3.
        let c6 = vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)];
        assert!(check_expander(6, &c6, 0.5, 18).unwrap());
        assert!(check_expander(6, &c6, 2.0 / 3.0, 18).unwrap());
        assert!(!check_expander(6, &c6, 0.7, 18).unwrap());
        assert!(check_expander(6, &c6, 1.0 / 3.0, 18).unwrap());
    }
}
