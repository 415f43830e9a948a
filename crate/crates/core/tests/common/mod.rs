//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the flow code it checks.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linar::graph::{Graph, NodeId};
use linar::topology::{unit_disk_graph, Position};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn id(i: usize) -> NodeId {
    NodeId::from(i)
}

/// `n` uniform points in a `side`-square.
pub fn scatter(r: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<Position> {
    (0..n)
        .map(|_| Position::new(r.gen::<f64>() * side, r.gen::<f64>() * side))
        .collect()
}

/// A random unit-disk graph with range 1 over a square sized for the given
/// mean degree.
pub fn random_geometric(r: &mut ChaCha8Rng, n: usize, mean_degree: f64) -> Graph {
    let side = (n as f64 * std::f64::consts::PI / mean_degree).sqrt();
    unit_disk_graph(&scatter(r, n, side), 1.0)
}

pub fn adjacency(g: &Graph) -> Vec<u32> {
    let mut adj = vec![0u32; g.slots()];
    for (a, b) in g.edges() {
        adj[a.index()] |= 1 << b.index();
        adj[b.index()] |= 1 << a.index();
    }
    adj
}

fn connected_without(adj: &[u32], alive: u32) -> bool {
    if alive == 0 {
        return true;
    }
    let start = alive.trailing_zeros();
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let next = adj[v] & alive & !seen;
        seen |= next;
        frontier |= next;
    }
    seen == alive
}

/// Vertex connectivity by enumerating node subsets smallest first. Slots
/// must be ≤ 32.
pub fn kappa_by_cuts(g: &Graph) -> usize {
    let adj = adjacency(g);
    let nodes: Vec<usize> = g.nodes().map(|v| v.index()).collect();
    let all: u32 = nodes.iter().map(|&v| 1u32 << v).sum();
    let n = nodes.len();
    if n <= 1 {
        return 0;
    }
    for size in 0..n.saturating_sub(1) {
        for cut in nodes.iter().combinations(size) {
            let mask: u32 = cut.iter().map(|&&v| 1u32 << v).sum();
            if !connected_without(&adj, all & !mask) {
                return size;
            }
        }
    }
    n - 1
}

/// Trusted when losing `v` leaves connectivity no lower than before.
pub fn trusted_by_cuts(g: &Graph, v: NodeId) -> bool {
    kappa_by_cuts(&g.without(v)) >= kappa_by_cuts(g)
}

/// Maximum number of internally vertex-disjoint x–y paths, by exhaustive
/// search over path packings memoised on the set of used internal nodes.
pub fn max_path_packing(g: &Graph, x: NodeId, y: NodeId) -> usize {
    let adj = adjacency(g);
    let (x, y) = (x.index(), y.index());
    let direct = (adj[x] >> y) & 1 == 1;
    // internal node sets of all simple x–y paths of length ≥ 2
    let mut paths: Vec<u32> = Vec::new();
    fn dfs(adj: &[u32], u: usize, y: usize, x: usize, used: u32, out: &mut Vec<u32>) {
        let mut nb = adj[u] & !used & !(1 << x);
        while nb != 0 {
            let w = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            if w == y {
                if used != 0 {
                    out.push(used);
                }
                continue;
            }
            dfs(adj, w, y, x, used | 1 << w, out);
        }
    }
    dfs(&adj, x, y, x, 0, &mut paths);
    paths.sort_unstable();
    paths.dedup();
    // only minimal sets matter for a packing
    let minimal: Vec<u32> = paths
        .iter()
        .copied()
        .filter(|&p| !paths.iter().any(|&q| q != p && q & p == q))
        .collect();
    let mut memo: HashMap<u32, usize> = HashMap::new();
    fn best(used: u32, paths: &[u32], memo: &mut HashMap<u32, usize>) -> usize {
        if let Some(&v) = memo.get(&used) {
            return v;
        }
        let v = paths
            .iter()
            .filter(|&&p| p & used == 0)
            .map(|&p| 1 + best(used | p, paths, memo))
            .max()
            .unwrap_or(0);
        memo.insert(used, v);
        v
    }
    best(0, &minimal, &mut memo) + direct as usize
}

/// Hop distances by plain BFS.
pub fn bfs(g: &Graph, s: NodeId) -> Vec<Option<usize>> {
    let mut d = vec![None; g.slots()];
    d[s.index()] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &w in g.neighbors(u) {
            if d[w.index()].is_none() {
                d[w.index()] = Some(d[u.index()].unwrap() + 1);
                q.push_back(w);
            }
        }
    }
    d
}

/// All-pairs shortest travel distance over the unit-disk graph of `pts`.
pub fn floyd(pts: &[Position], range: f64) -> Vec<Vec<f64>> {
    let n = pts.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        for j in 0..n {
            let e = ((pts[i].x - pts[j].x).powi(2) + (pts[i].y - pts[j].y).powi(2)).sqrt();
            if i == j {
                d[i][j] = 0.0;
            } else if e <= range {
                d[i][j] = e;
            }
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][m] + d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}
