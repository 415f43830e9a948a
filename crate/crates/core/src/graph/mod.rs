//! Exact graph primitives: vertex-disjoint path counts, vertex connectivity,
//! the Trusted/Joint ground truth and 2-hop subgraph extraction.
//!
//! A [`Graph`] lives in a fixed id space `0..slots`. Nodes can be absent, so
//! `G/v` and local subgraphs keep the ids of the topology they came from.

mod flow;

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

pub use flow::{disjoint_path_packing, PathPacking};

/// Dense node identifier, unique within one topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {0} is not part of the graph")]
    UnknownNode(NodeId),
    #[error("source and target must differ (both are {0})")]
    SameEndpoints(NodeId),
    #[error("graph has no nodes")]
    Empty,
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    present: Vec<bool>,
}

/// Vertex connectivity together with a minimum separating set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub kappa: usize,
    /// Empty when the graph is complete (or has a single node).
    pub witness_cut: Vec<NodeId>,
}

impl Graph {
    /// `n` isolated nodes `0..n`.
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            present: vec![true; n],
        }
    }

    /// Id space of `slots` ids, none of them present yet.
    pub fn empty_slots(slots: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); slots],
            present: vec![false; slots],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::new(n);
        for &(a, b) in edges {
            g.add_edge(NodeId::from(a), NodeId::from(b))?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a.into(), b.into()).expect("distinct endpoints");
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::new(n);
        for a in 0..n {
            g.add_edge(a.into(), ((a + 1) % n).into()).expect("n >= 3");
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::new(n);
        for a in 1..n {
            g.add_edge((a - 1).into(), a.into()).expect("distinct endpoints");
        }
        g
    }

    /// Size of the id space (present or not).
    pub fn slots(&self) -> usize {
        self.adj.len()
    }

    pub fn node_count(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.present.get(v.index()).copied().unwrap_or(false)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| NodeId::from(i))
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v.index()]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v.index()].len()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.contains(a) && self.adj[a.index()].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, list)| {
            let a = NodeId::from(a);
            list.iter().filter(move |&&b| a < b).map(move |&b| (a, b))
        })
    }

    /// Marks `v` present without touching edges.
    pub fn insert_node(&mut self, v: NodeId) {
        if v.index() >= self.adj.len() {
            self.adj.resize(v.index() + 1, Vec::new());
            self.present.resize(v.index() + 1, false);
        }
        self.present[v.index()] = true;
    }

    /// Adds the undirected edge; inserts missing endpoints. Duplicates are ignored.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<bool, GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        self.insert_node(a);
        self.insert_node(b);
        match self.adj[a.index()].binary_search(&b) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adj[a.index()].insert(pos, b);
                let list = &mut self.adj[b.index()];
                let pos = list.binary_search(&a).unwrap_err();
                list.insert(pos, a);
                Ok(true)
            }
        }
    }

    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        if !self.has_edge(a, b) {
            return false;
        }
        let list = &mut self.adj[a.index()];
        list.remove(list.binary_search(&b).unwrap());
        let list = &mut self.adj[b.index()];
        list.remove(list.binary_search(&a).unwrap());
        true
    }

    /// Removes `v` and its incident edges in place.
    pub fn remove_node(&mut self, v: NodeId) {
        if !self.contains(v) {
            return;
        }
        for u in std::mem::take(&mut self.adj[v.index()]) {
            let list = &mut self.adj[u.index()];
            if let Ok(pos) = list.binary_search(&v) {
                list.remove(pos);
            }
        }
        self.present[v.index()] = false;
    }

    /// `G/v`.
    pub fn without(&self, v: NodeId) -> Graph {
        let mut g = self.clone();
        g.remove_node(v);
        g
    }

    /// Subgraph induced on `keep` (ids outside the graph are ignored).
    pub fn induced(&self, keep: &[NodeId]) -> Graph {
        let mut mask = vec![false; self.slots()];
        for &v in keep {
            if self.contains(v) {
                mask[v.index()] = true;
            }
        }
        let adj = self
            .adj
            .iter()
            .enumerate()
            .map(|(i, list)| {
                if mask[i] {
                    list.iter().copied().filter(|u| mask[u.index()]).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Graph { adj, present: mask }
    }

    pub fn is_complete(&self) -> bool {
        let n = self.node_count();
        n > 0 && self.edge_count() == n * (n - 1) / 2
    }

    pub fn min_degree_node(&self) -> Option<NodeId> {
        self.nodes().min_by_key(|&v| (self.degree(v), v))
    }

    pub fn max_degree(&self) -> usize {
        self.nodes().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.nodes().next() else {
            return true;
        };
        bfs_distances(self, start).iter().flatten().count() == self.node_count()
    }

    fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(v))
        }
    }
}

/// Hop distances from `start` (`None` for unreachable or absent ids).
pub fn bfs_distances(g: &Graph, start: NodeId) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.slots()];
    if !g.contains(start) {
        return dist;
    }
    dist[start.index()] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v.index()].unwrap();
        for &u in g.neighbors(v) {
            if dist[u.index()].is_none() {
                dist[u.index()] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Maximum number of internally vertex-disjoint `x`–`y` paths. A direct edge
/// counts as one path.
pub fn disjoint_paths(g: &Graph, x: NodeId, y: NodeId) -> Result<usize, GraphError> {
    disjoint_paths_capped(g, x, y, usize::MAX)
}

/// Like [`disjoint_paths`] but stops once `cap` paths have been found.
pub fn disjoint_paths_capped(
    g: &Graph,
    x: NodeId,
    y: NodeId,
    cap: usize,
) -> Result<usize, GraphError> {
    g.check(x)?;
    g.check(y)?;
    if x == y {
        return Err(GraphError::SameEndpoints(x));
    }
    Ok(flow::SplitFlow::run(g, x, y, cap).value)
}

/// [`disjoint_paths_capped`] for many pairs of one graph, sharing the flow
/// network between them.
pub fn disjoint_paths_many(
    g: &Graph,
    pairs: &[(NodeId, NodeId)],
    cap: usize,
) -> Result<Vec<usize>, GraphError> {
    for &(x, y) in pairs {
        g.check(x)?;
        g.check(y)?;
        if x == y {
            return Err(GraphError::SameEndpoints(x));
        }
    }
    let mut net = flow::SplitFlow::build(g);
    Ok(pairs.iter().map(|&(x, y)| net.solve(x, y, cap)).collect())
}

/// Global vertex connectivity with a witness separator.
///
/// Pivots on the minimum-degree node `s`: the answer is the minimum of the
/// local connectivity between `s` and each non-neighbour, and between each
/// non-adjacent pair of neighbours of `s`. Disconnected graphs report 0.
pub fn vertex_connectivity(g: &Graph) -> Result<ConnectivityReport, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if g.is_complete() {
        return Ok(ConnectivityReport {
            kappa: n - 1,
            witness_cut: Vec::new(),
        });
    }
    let s = g.min_degree_node().expect("nonempty");
    let mut best: Option<(usize, NodeId, NodeId)> = None;
    let mut net = flow::SplitFlow::build(g);
    let mut consider = |a: NodeId, b: NodeId, best: &mut Option<(usize, NodeId, NodeId)>| {
        let cap = best.map_or(usize::MAX, |(k, _, _)| k);
        if cap == 0 {
            return;
        }
        let value = net.solve(a, b, cap);
        if best.is_none_or(|(k, _, _)| value < k) {
            *best = Some((value, a, b));
        }
    };
    for y in g.nodes() {
        if y != s && !g.has_edge(s, y) {
            consider(s, y, &mut best);
        }
    }
    let around = g.neighbors(s);
    for (i, &a) in around.iter().enumerate() {
        for &b in &around[i + 1..] {
            if !g.has_edge(a, b) {
                consider(a, b, &mut best);
            }
        }
    }
    let (kappa, a, b) = best.expect("a non-complete graph has a non-adjacent pair");
    let witness_cut = flow::SplitFlow::run(g, a, b, usize::MAX).min_cut(g);
    debug_assert_eq!(witness_cut.len(), kappa);
    Ok(ConnectivityReport { kappa, witness_cut })
}

/// Shorthand for `vertex_connectivity(g)?.kappa`, with 0 for the empty graph.
pub fn kappa(g: &Graph) -> usize {
    vertex_connectivity(g).map(|r| r.kappa).unwrap_or(0)
}

/// Is `g` at least `k`-connected? Cheaper than computing kappa when `k` is small.
pub fn is_k_connected(g: &Graph, k: usize) -> bool {
    let n = g.node_count();
    if k == 0 {
        return true;
    }
    if n <= k {
        return false;
    }
    if g.nodes().any(|v| g.degree(v) < k) {
        return false;
    }
    if g.is_complete() {
        return n > k;
    }
    let s = g.min_degree_node().expect("nonempty");
    let mut net = flow::SplitFlow::build(g);
    let mut reaches = |a: NodeId, b: NodeId| net.solve(a, b, k) >= k;
    for y in g.nodes() {
        if y != s && !g.has_edge(s, y) && !reaches(s, y) {
            return false;
        }
    }
    let around = g.neighbors(s);
    for (i, &a) in around.iter().enumerate() {
        for &b in &around[i + 1..] {
            if !g.has_edge(a, b) && !reaches(a, b) {
                return false;
            }
        }
    }
    true
}

/// Ground-truth Trusted test: removing `v` does not lower the connectivity.
///
/// Removal can also raise kappa (a lone minimum-degree node hanging off a
/// denser core); such a node is Trusted as well, since its failure leaves the
/// network at least as connected as before.
pub fn is_trusted_oracle(g: &Graph, v: NodeId) -> Result<bool, GraphError> {
    g.check(v)?;
    let before = vertex_connectivity(g)?.kappa;
    Ok(is_k_connected(&g.without(v), before))
}

/// Subgraph induced on the closed 2-hop ball around `v`.
pub fn local_subgraph_2hop(g: &Graph, v: NodeId) -> Result<Graph, GraphError> {
    g.check(v)?;
    let ball: Vec<NodeId> = bfs_distances(g, v)
        .iter()
        .enumerate()
        .filter(|(_, d)| matches!(d, Some(d) if *d <= 2))
        .map(|(i, _)| NodeId::from(i))
        .collect();
    Ok(g.induced(&ball))
}
