use std::collections::VecDeque;

use super::{Graph, GraphError, NodeId};

/// Unit-capacity max flow on the node-split digraph: every node `v` becomes
/// `v_in -> v_out` with capacity one, every undirected edge `{u, v}` the two
/// arcs `u_out -> v_in` and `v_out -> u_in`.
pub(super) struct SplitFlow {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u32>,
    initial: Vec<u32>,
    source: usize,
    sink: usize,
    pub value: usize,
    parent: Vec<usize>,
    seen: Vec<u32>,
    stamp: u32,
    queue: VecDeque<usize>,
}

const NIL: usize = usize::MAX;
const BIG: u32 = u32::MAX / 2;

#[inline]
fn vin(v: NodeId) -> usize {
    2 * v.index()
}

#[inline]
fn vout(v: NodeId) -> usize {
    2 * v.index() + 1
}

impl SplitFlow {
    /// The network for every pair of `g` at once; [`SplitFlow::solve`]
    /// picks the endpoints. Edge arcs are uncapacitated so minimum cuts fall
    /// on split arcs.
    pub fn build(g: &Graph) -> Self {
        let vertices = 2 * g.slots();
        let arcs = 2 * (g.node_count() + 2 * g.edge_count());
        let mut net = SplitFlow {
            head: vec![NIL; vertices],
            next: Vec::with_capacity(arcs),
            to: Vec::with_capacity(arcs),
            cap: Vec::with_capacity(arcs),
            initial: Vec::new(),
            source: 0,
            sink: 0,
            value: 0,
            parent: vec![NIL; vertices],
            seen: vec![0; vertices],
            stamp: 0,
            queue: VecDeque::with_capacity(vertices),
        };
        for v in g.nodes() {
            net.arc(vin(v), vout(v), 1);
            for &u in g.neighbors(v) {
                net.arc(vout(v), vin(u), BIG);
            }
        }
        net.initial = net.cap.clone();
        net
    }

    fn arc(&mut self, from: usize, to: usize, cap: u32) {
        for (a, b, c) in [(from, to, cap), (to, from, 0)] {
            self.to.push(b);
            self.cap.push(c);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    /// Maximum flow from `x` to `y`, stopping at `limit`. The split arcs of
    /// the endpoints never carry flow; a direct edge counts as one path.
    pub fn solve(&mut self, x: NodeId, y: NodeId, limit: usize) -> usize {
        self.cap.copy_from_slice(&self.initial);
        self.source = vout(x);
        self.sink = vin(y);
        self.value = 0;
        let mut e = self.head[self.source];
        while e != NIL {
            if self.to[e] == self.sink && e.is_multiple_of(2) {
                self.cap[e] = 1;
            }
            e = self.next[e];
        }
        while self.value < limit && self.augment() {
            self.value += 1;
        }
        self.value
    }

    /// One-shot build and solve.
    pub fn run(g: &Graph, x: NodeId, y: NodeId, limit: usize) -> Self {
        let mut net = Self::build(g);
        net.solve(x, y, limit);
        net
    }

    fn augment(&mut self) -> bool {
        self.stamp += 1;
        let stamp = self.stamp;
        self.seen[self.source] = stamp;
        self.queue.clear();
        self.queue.push_back(self.source);
        while let Some(v) = self.queue.pop_front() {
            let mut e = self.head[v];
            while e != NIL {
                let u = self.to[e];
                if self.cap[e] > 0 && self.seen[u] != stamp {
                    self.seen[u] = stamp;
                    self.parent[u] = e;
                    if u == self.sink {
                        let mut w = u;
                        while w != self.source {
                            let e = self.parent[w];
                            self.cap[e] -= 1;
                            self.cap[e ^ 1] += 1;
                            w = self.to[e ^ 1];
                        }
                        return true;
                    }
                    self.queue.push_back(u);
                }
                e = self.next[e];
            }
        }
        false
    }

    fn residual_reach(&self) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(v) = queue.pop_front() {
            let mut e = self.head[v];
            while e != NIL {
                let u = self.to[e];
                if self.cap[e] > 0 && !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
                e = self.next[e];
            }
        }
        seen
    }

    /// Nodes whose split arc crosses the minimum cut. Only meaningful for a
    /// maximum flow between non-adjacent endpoints.
    pub fn min_cut(&self, g: &Graph) -> Vec<NodeId> {
        let seen = self.residual_reach();
        g.nodes()
            .filter(|&v| seen[vin(v)] && !seen[vout(v)])
            .collect()
    }

    fn paths(&self, x: NodeId, y: NodeId) -> Vec<Vec<NodeId>> {
        // Forward arcs sit at even indices; the residual of the paired reverse
        // arc is the flow carried.
        let mut used = vec![false; self.to.len()];
        let mut out = Vec::with_capacity(self.value);
        for _ in 0..self.value {
            let mut path = vec![x];
            let mut v = self.source;
            while v != self.sink {
                let mut e = self.head[v];
                while e != NIL {
                    if e.is_multiple_of(2) && self.cap[e ^ 1] > 0 && !used[e] {
                        break;
                    }
                    e = self.next[e];
                }
                assert!(e != NIL, "flow decomposition lost its way");
                used[e] = true;
                v = self.to[e];
                if v.is_multiple_of(2) {
                    path.push(NodeId::from(v / 2));
                }
            }
            debug_assert_eq!(*path.last().unwrap(), y);
            out.push(path);
        }
        out
    }
}

/// A maximum set of internally vertex-disjoint paths, each listed from the
/// source to the target inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPacking {
    pub paths: Vec<Vec<NodeId>>,
}

impl PathPacking {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Internal nodes of all paths, in path order.
    pub fn internal_nodes(&self) -> Vec<NodeId> {
        self.paths
            .iter()
            .flat_map(|p| p[1..p.len() - 1].iter().copied())
            .collect()
    }
}

/// Up to `cap` internally vertex-disjoint `x`–`y` paths.
pub fn disjoint_path_packing(
    g: &Graph,
    x: NodeId,
    y: NodeId,
    cap: usize,
) -> Result<PathPacking, GraphError> {
    g.check(x)?;
    g.check(y)?;
    if x == y {
        return Err(GraphError::SameEndpoints(x));
    }
    let net = SplitFlow::run(g, x, y, cap);
    Ok(PathPacking {
        paths: net.paths(x, y),
    })
}
