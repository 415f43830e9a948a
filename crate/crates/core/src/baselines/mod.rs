//! Centralised comparison algorithms on global snapshots, plus an exhaustive
//! optimum for tiny instances.
//!
//! Positions carry connectivity: a plan is feasible when the unit-disk graph
//! of the occupied positions is k-connected. The cost of a relocation is
//! the shortest travel distance through the network, i.e. the geodesic in
//! the unit-disk graph of the positions occupied just before the failure
//! (the vacancy included). For a hop to an adjacent position this is the
//! straight-line distance.

mod hungarian;

pub use hungarian::assign;

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{is_k_connected, Graph, NodeId};
use crate::protocol::{MessageKind, HEADER_BYTES, ID_BYTES};
use crate::sim::ByteLedger;
use crate::topology::{euclidean_cost, in_range, unit_disk_graph, Position, Topology};

/// Live nodes and their positions; dead ids keep their last position.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub positions: Vec<Position>,
    pub alive: Vec<bool>,
    pub range: f64,
}

impl Network {
    pub fn new(positions: Vec<Position>, range: f64) -> Self {
        Network {
            alive: vec![true; positions.len()],
            positions,
            range,
        }
    }

    pub fn from_topology(t: &Topology) -> Self {
        Network::new(t.positions.clone(), t.range)
    }

    pub fn live(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.alive.len()).filter(|&i| self.alive[i]).map(NodeId::from)
    }

    pub fn live_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn live_positions(&self) -> Vec<Position> {
        self.live().map(|v| self.positions[v.index()]).collect()
    }

    pub fn graph(&self) -> Graph {
        let mut g = unit_disk_graph(&self.positions, self.range);
        for v in (0..self.alive.len()).map(NodeId::from) {
            if !self.alive[v.index()] {
                g.remove_node(v);
            }
        }
        g
    }

    pub fn kill(&mut self, v: NodeId) {
        self.alive[v.index()] = false;
    }

    pub fn without(&self, v: NodeId) -> Network {
        let mut n = self.clone();
        n.kill(v);
        n
    }

    /// Carries out `plan`; moves of unknown ids add new nodes.
    pub fn apply(&mut self, plan: &RestorationPlan) {
        for m in &plan.moves {
            let i = m.node.index();
            if i >= self.positions.len() {
                self.positions.resize(i + 1, m.from);
                self.alive.resize(i + 1, false);
                self.alive[i] = true;
            }
            self.positions[i] = m.to;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub node: NodeId,
    pub from: Position,
    pub to: Position,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RestorationPlan {
    pub moves: Vec<Move>,
    pub total_cost: f64,
}

impl RestorationPlan {
    fn push(&mut self, node: NodeId, from: Position, to: Position, cost: f64) {
        self.moves.push(Move { node, from, to, cost });
        self.total_cost += cost;
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RestoreError {
    #[error("restoration infeasible after {} moves", partial.moves.len())]
    Infeasible { partial: RestorationPlan },
    #[error("node {0} is not alive")]
    NotAlive(NodeId),
    #[error("exhaustive search refused for {0} nodes (limit {BRUTE_FORCE_LIMIT})")]
    TooLarge(usize),
}

pub const BRUTE_FORCE_LIMIT: usize = 10;

fn infeasible() -> RestoreError {
    RestoreError::Infeasible {
        partial: RestorationPlan::default(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Linar,
    Mccr,
    Tapu,
    Greedy,
    Localized,
    Basic,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Linar,
        Algorithm::Mccr,
        Algorithm::Tapu,
        Algorithm::Greedy,
        Algorithm::Localized,
        Algorithm::Basic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Linar => "linar",
            Algorithm::Mccr => "mccr",
            Algorithm::Tapu => "tapu",
            Algorithm::Greedy => "greedy",
            Algorithm::Localized => "localized",
            Algorithm::Basic => "basic",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s.trim()))
    }
}

/// Shortest travel distances between the positions of `ids`, moving only
/// between positions in radio range of each other.
#[derive(Debug, Clone)]
pub struct Geodesics {
    ids: Vec<NodeId>,
    slot: Vec<Option<usize>>,
    dist: Vec<Vec<f64>>,
    parent: Vec<Vec<Option<usize>>>,
}

impl Geodesics {
    pub fn new(positions: &[Position], ids: &[NodeId], range: f64) -> Self {
        let m = ids.len();
        let mut slot = vec![None; positions.len()];
        for (i, v) in ids.iter().enumerate() {
            slot[v.index()] = Some(i);
        }
        let pts: Vec<Position> = ids.iter().map(|v| positions[v.index()]).collect();
        let mut dist = Vec::with_capacity(m);
        let mut parent = Vec::with_capacity(m);
        for s in 0..m {
            let (d, p) = dijkstra(&pts, range, s);
            dist.push(d);
            parent.push(p);
        }
        Geodesics {
            ids: ids.to_vec(),
            slot,
            dist,
            parent,
        }
    }

    fn at(&self, v: NodeId) -> usize {
        self.slot[v.index()].expect("position in table")
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.dist[self.at(a)][self.at(b)]
    }

    /// Positions from `a` to `b` along a shortest route, both ends included.
    pub fn route(&self, a: NodeId, b: NodeId) -> Option<Vec<NodeId>> {
        let (sa, sb) = (self.at(a), self.at(b));
        if !self.dist[sa][sb].is_finite() {
            return None;
        }
        let mut out = vec![self.ids[sb]];
        let mut cur = sb;
        while cur != sa {
            cur = self.parent[sa][cur]?;
            out.push(self.ids[cur]);
        }
        out.reverse();
        Some(out)
    }
}

fn dijkstra(pts: &[Position], range: f64, s: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let m = pts.len();
    let mut dist = vec![f64::INFINITY; m];
    let mut parent = vec![None; m];
    let mut done = vec![false; m];
    dist[s] = 0.0;
    // Dense graph, small m: the O(m²) scan beats a heap and has no float keys.
    for _ in 0..m {
        let Some(u) = (0..m)
            .filter(|&i| !done[i] && dist[i].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
        else {
            break;
        };
        done[u] = true;
        for v in 0..m {
            if done[v] || !in_range(pts[u], pts[v], range) {
                continue;
            }
            let d = dist[u] + euclidean_cost(pts[u], pts[v]);
            if d < dist[v] {
                dist[v] = d;
                parent[v] = Some(u);
            }
        }
    }
    (dist, parent)
}

fn check_failed(net: &Network, failed: NodeId) -> Result<(), RestoreError> {
    if failed.index() >= net.alive.len() || !net.alive[failed.index()] {
        return Err(RestoreError::NotAlive(failed));
    }
    Ok(())
}

/// Would the positions of `ids` minus `dropped` form a k-connected network?
fn positions_k_connected(net: &Network, ids: &[NodeId], dropped: NodeId, k: usize) -> bool {
    let pts: Vec<Position> = ids
        .iter()
        .filter(|&&v| v != dropped)
        .map(|v| net.positions[v.index()])
        .collect();
    is_k_connected(&unit_disk_graph(&pts, net.range), k)
}

/// Minimum-cost assignment of the survivors to all pre-failure positions but
/// one. Candidate positions to leave empty are tried cheapest first; the
/// cost of leaving `p` empty is at least the geodesic from the vacancy to
/// `p`, which ends the search early.
pub fn mccr_restore(net: &Network, failed: NodeId, k: usize) -> Result<RestorationPlan, RestoreError> {
    check_failed(net, failed)?;
    let ids: Vec<NodeId> = net.live().collect();
    let geo = Geodesics::new(&net.positions, &ids, net.range);
    let mut order: Vec<NodeId> = ids.clone();
    order.sort_by(|&a, &b| geo.distance(failed, a).total_cmp(&geo.distance(failed, b)).then(a.cmp(&b)));
    let movers: Vec<NodeId> = ids.iter().copied().filter(|&v| v != failed).collect();
    let mut best: Option<RestorationPlan> = None;
    for p in order {
        let bound = geo.distance(failed, p);
        if !bound.is_finite() || best.as_ref().is_some_and(|b| bound >= b.total_cost) {
            break;
        }
        if !positions_k_connected(net, &ids, p, k) {
            continue;
        }
        let slots: Vec<NodeId> = ids.iter().copied().filter(|&v| v != p).collect();
        let cost: Vec<Vec<f64>> = movers
            .iter()
            .map(|&a| slots.iter().map(|&b| finite(geo.distance(a, b))).collect())
            .collect();
        let col = assign(&cost);
        let mut plan = RestorationPlan::default();
        for (i, &j) in col.iter().enumerate() {
            let (a, b) = (movers[i], slots[j]);
            if a != b {
                plan.push(a, net.positions[a.index()], net.positions[b.index()], geo.distance(a, b));
            }
        }
        if plan.total_cost.is_finite() && best.as_ref().is_none_or(|b| plan.total_cost < b.total_cost) {
            best = Some(plan);
        }
    }
    best.ok_or_else(infeasible)
}

/// Unreachable pairs get a prohibitive but finite cost so the assignment
/// stays well defined; plans using one are rejected afterwards.
fn finite(d: f64) -> f64 {
    if d.is_finite() {
        d
    } else {
        1e12
    }
}

/// Cheapest safe node (one whose position can stay empty) by travel
/// distance to the vacancy; every node on its shortest route shifts one hop
/// towards the vacancy.
pub fn tapu_restore(net: &Network, failed: NodeId, k: usize) -> Result<RestorationPlan, RestoreError> {
    check_failed(net, failed)?;
    let ids: Vec<NodeId> = net.live().collect();
    let geo = Geodesics::new(&net.positions, &ids, net.range);
    let mut order: Vec<NodeId> = ids.clone();
    order.sort_by(|&a, &b| geo.distance(failed, a).total_cmp(&geo.distance(failed, b)).then(a.cmp(&b)));
    let safe = order
        .into_iter()
        .filter(|&s| geo.distance(failed, s).is_finite())
        .find(|&s| positions_k_connected(net, &ids, s, k))
        .ok_or_else(infeasible)?;
    let route = geo.route(failed, safe).expect("finite distance");
    let mut plan = RestorationPlan::default();
    for w in route.windows(2) {
        let (to, node) = (w[0], w[1]);
        plan.push(node, net.positions[node.index()], net.positions[to.index()], geo.distance(node, to));
    }
    Ok(plan)
}

/// Shared chain for Greedy and Localized: `pick` chooses among the unmoved
/// live nodes in range of the current vacancy.
fn chain_restore(
    net: &Network,
    failed: NodeId,
    k: usize,
    pick: impl Fn(&Network, &Graph, Position, &[NodeId]) -> NodeId,
) -> Result<RestorationPlan, RestoreError> {
    check_failed(net, failed)?;
    let mut cur = net.without(failed);
    let mut plan = RestorationPlan::default();
    let mut moved = vec![false; net.positions.len()];
    let mut vacancy = net.positions[failed.index()];
    let budget = net.live_count();
    loop {
        let g = cur.graph();
        if is_k_connected(&g, k) {
            return Ok(plan);
        }
        if plan.moves.len() >= budget {
            return Err(RestoreError::Infeasible { partial: plan });
        }
        let near: Vec<NodeId> = cur
            .live()
            .filter(|v| !moved[v.index()] && in_range(cur.positions[v.index()], vacancy, net.range))
            .collect();
        if near.is_empty() {
            return Err(RestoreError::Infeasible { partial: plan });
        }
        let v = pick(&cur, &g, vacancy, &near);
        let from = cur.positions[v.index()];
        plan.push(v, from, vacancy, euclidean_cost(from, vacancy));
        cur.positions[v.index()] = vacancy;
        moved[v.index()] = true;
        vacancy = from;
    }
}

/// Moves the nearest neighbour of the vacancy, repeating on the vacancy it
/// leaves until the network is k-connected again.
pub fn greedy_restore(net: &Network, failed: NodeId, k: usize) -> Result<RestorationPlan, RestoreError> {
    chain_restore(net, failed, k, |cur, _, vacancy, near| {
        *near
            .iter()
            .min_by(|&&a, &&b| {
                euclidean_cost(cur.positions[a.index()], vacancy)
                    .total_cmp(&euclidean_cost(cur.positions[b.index()], vacancy))
                    .then(a.cmp(&b))
            })
            .expect("nonempty")
    })
}

/// As Greedy, but the neighbour with the smallest degree moves.
pub fn localized_restore(net: &Network, failed: NodeId, k: usize) -> Result<RestorationPlan, RestoreError> {
    chain_restore(net, failed, k, |_, g, _, near| {
        *near.iter().min_by_key(|&&v| (g.degree(v), v)).expect("nonempty")
    })
}

/// A spare pool at a depot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparePool {
    pub depot: Position,
    pub remaining: usize,
}

/// Sends one spare from the depot to the failed position. The spare gets
/// the next unused id.
pub fn basic_restore(net: &Network, failed: NodeId, pool: &mut SparePool) -> Result<RestorationPlan, RestoreError> {
    check_failed(net, failed)?;
    if pool.remaining == 0 {
        return Err(infeasible());
    }
    pool.remaining -= 1;
    let to = net.positions[failed.index()];
    let mut plan = RestorationPlan::default();
    plan.push(NodeId::from(net.positions.len()), pool.depot, to, euclidean_cost(pool.depot, to));
    Ok(plan)
}

/// Exact optimum over every assignment of survivors to pre-failure
/// positions minus one, with at most `move_budget` nodes relocated.
pub fn brute_force_optimal(
    net: &Network,
    failed: NodeId,
    k: usize,
    move_budget: usize,
) -> Result<RestorationPlan, RestoreError> {
    check_failed(net, failed)?;
    let ids: Vec<NodeId> = net.live().collect();
    if ids.len() > BRUTE_FORCE_LIMIT {
        return Err(RestoreError::TooLarge(ids.len()));
    }
    let geo = Geodesics::new(&net.positions, &ids, net.range);
    let movers: Vec<NodeId> = ids.iter().copied().filter(|&v| v != failed).collect();
    let mut best: Option<(f64, Vec<NodeId>)> = None;
    for &p in &ids {
        if !positions_k_connected(net, &ids, p, k) {
            continue;
        }
        let slots: Vec<NodeId> = ids.iter().copied().filter(|&v| v != p).collect();
        let mut used = vec![false; slots.len()];
        let mut chosen = Vec::with_capacity(movers.len());
        search(&geo, &movers, &slots, &mut used, &mut chosen, 0.0, 0, move_budget, &mut best);
    }
    let (_, targets) = best.ok_or_else(infeasible)?;
    let mut plan = RestorationPlan::default();
    for (&a, &b) in movers.iter().zip(&targets) {
        if a != b {
            plan.push(a, net.positions[a.index()], net.positions[b.index()], geo.distance(a, b));
        }
    }
    Ok(plan)
}

#[allow(clippy::too_many_arguments)]
fn search(
    geo: &Geodesics,
    movers: &[NodeId],
    slots: &[NodeId],
    used: &mut [bool],
    chosen: &mut Vec<NodeId>,
    cost: f64,
    moves: usize,
    budget: usize,
    best: &mut Option<(f64, Vec<NodeId>)>,
) {
    if best.as_ref().is_some_and(|b| cost >= b.0) {
        return;
    }
    let i = chosen.len();
    if i == movers.len() {
        *best = Some((cost, chosen.clone()));
        return;
    }
    for j in 0..slots.len() {
        if used[j] {
            continue;
        }
        let relocate = slots[j] != movers[i];
        if relocate && moves == budget {
            continue;
        }
        let d = geo.distance(movers[i], slots[j]);
        if !d.is_finite() {
            continue;
        }
        used[j] = true;
        chosen.push(slots[j]);
        search(geo, movers, slots, used, chosen, cost + d, moves + relocate as usize, budget, best);
        chosen.pop();
        used[j] = false;
    }
}

/// Size of a neighbour list sent to the sink.
pub fn neighbor_report_size(degree: usize) -> usize {
    HEADER_BYTES + ID_BYTES + degree * (ID_BYTES + 8)
}
pub const FAILURE_REPORT_SIZE: usize = HEADER_BYTES + ID_BYTES;
pub const MOVE_COMMAND_SIZE: usize = HEADER_BYTES + ID_BYTES + 8;

/// Sink of the central schemes: node 0 while alive, else the lowest live id.
pub fn sink(net: &Network) -> Option<NodeId> {
    net.live().next()
}

/// BFS parent pointers towards `root`.
fn bfs_parents(g: &Graph, root: NodeId) -> Vec<Option<NodeId>> {
    let mut parent = vec![None; g.slots()];
    let mut seen = vec![false; g.slots()];
    seen[root.index()] = true;
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for &v in g.neighbors(u) {
            if !seen[v.index()] {
                seen[v.index()] = true;
                parent[v.index()] = Some(u);
                q.push_back(v);
            }
        }
    }
    parent
}

/// Every hop of a message routed from `from` to the root of `parent`.
fn route_up(ledger: &mut ByteLedger, parent: &[Option<NodeId>], from: NodeId, root: NodeId, kind: MessageKind, size: usize) {
    let mut cur = from;
    while cur != root {
        let Some(next) = parent[cur.index()] else { return };
        ledger.record(cur, kind, size);
        cur = next;
    }
}

/// Bytes a central scheme spends on one failure. Basic only sends the
/// one-hop command that dispatches a spare; the others collect every
/// neighbour list and the failure report at the sink and route one command
/// to each mover.
pub fn central_ledger(before: &Network, failed: NodeId, plan: &RestorationPlan, basic: bool) -> ByteLedger {
    let mut ledger = ByteLedger::new(before.positions.len());
    let after = before.without(failed);
    let Some(root) = sink(&after) else { return ledger };
    if basic {
        ledger.record(root, MessageKind::MoveCommand, MOVE_COMMAND_SIZE);
        return ledger;
    }
    let g = after.graph();
    let parent = bfs_parents(&g, root);
    for u in after.live() {
        route_up(&mut ledger, &parent, u, root, MessageKind::NeighborReport, neighbor_report_size(g.degree(u)));
    }
    let gb = before.graph();
    if let Some(&reporter) = gb.neighbors(failed).first() {
        route_up(&mut ledger, &parent, reporter, root, MessageKind::FailureReport, FAILURE_REPORT_SIZE);
    }
    // A command travels down the same tree: one transmission per hop.
    for m in &plan.moves {
        let mut hops = Vec::new();
        let mut cur = m.node;
        while cur != root {
            let Some(next) = parent[cur.index()] else {
                hops.clear();
                break;
            };
            hops.push(next);
            cur = next;
        }
        for sender in hops {
            ledger.record(sender, MessageKind::MoveCommand, MOVE_COMMAND_SIZE);
        }
    }
    ledger
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::kappa;

    fn p(x: f64, y: f64) -> Position {
        Position::new(x, y)
    }

    /// Unit square of side 10 (a 2-connected 4-cycle) with a spare node
    /// beside corner 1, range 10.5.
    fn square() -> Network {
        Network::new(vec![p(0.0, 0.0), p(10.0, 0.0), p(10.0, 10.0), p(0.0, 10.0), p(18.0, 5.0)], 10.5)
    }

    #[test]
    fn already_k_connected_means_empty_plan() {
        let net = Network::new(vec![p(0.0, 0.0), p(5.0, 0.0), p(0.0, 5.0), p(5.0, 5.0)], 10.0);
        for f in [mccr_restore, tapu_restore, greedy_restore, localized_restore] {
            let plan = f(&net, NodeId(0), 2).unwrap();
            assert!(plan.moves.is_empty());
            assert_eq!(plan.total_cost, 0.0);
        }
    }

    #[test]
    fn square_gadget_moves_the_spare_neighbour() {
        let net = square();
        assert_eq!(kappa(&net.graph()), 2);
        let plan = mccr_restore(&net, NodeId(2), 2).unwrap();
        // only the spare at (18, 5) can leave without breaking 2-connectivity
        assert_eq!(plan.moves.len(), 1);
        assert_eq!(plan.moves[0].node, NodeId(4));
        let mut after = net.without(NodeId(2));
        after.apply(&plan);
        assert!(kappa(&after.graph()) >= 2);
        assert_eq!(tapu_restore(&net, NodeId(2), 2).unwrap().total_cost, plan.total_cost);
        let bf = brute_force_optimal(&net, NodeId(2), 2, 4).unwrap();
        assert!((bf.total_cost - plan.total_cost).abs() < 1e-9);
    }

    #[test]
    fn line_is_patched_from_the_near_end() {
        // 0 - 1 - 2 - 3 - 4 on a line; after 1 fails the cheapest fix is for
        // 0 to step in (cost 10), and the nearest-neighbour tie goes to 0.
        let net = Network::new((0..5).map(|i| p(10.0 * i as f64, 0.0)).collect(), 10.0);
        for f in [mccr_restore, tapu_restore, greedy_restore] {
            let plan = f(&net, NodeId(1), 1).unwrap();
            assert_eq!(plan.moves.len(), 1);
            assert_eq!(plan.moves[0].node, NodeId(0));
            assert!((plan.total_cost - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tapu_shifts_along_the_route() {
        // The left arm 5, 6, 7 is longer than the right one, so the right
        // end 4 is the cheapest safe node: 2, 3 and 4 each shift one hop.
        let net = Network::new(
            [0.0, 10.0, 20.0, 30.0, 40.0, -10.0, -20.0, -30.0].iter().map(|&x| p(x, 0.0)).collect(),
            10.0,
        );
        let t = tapu_restore(&net, NodeId(1), 1).unwrap();
        assert_eq!(t.moves.iter().map(|m| m.node).collect::<Vec<_>>(), vec![NodeId(2), NodeId(3), NodeId(4)]);
        assert!((t.total_cost - 30.0).abs() < 1e-12);
        let m = mccr_restore(&net, NodeId(1), 1).unwrap();
        assert!((m.total_cost - t.total_cost).abs() < 1e-9);
        let bf = brute_force_optimal(&net, NodeId(1), 1, 6).unwrap();
        assert!((bf.total_cost - t.total_cost).abs() < 1e-9);
    }

    #[test]
    fn localized_prefers_low_degree_then_id() {
        // vacancy at 0; neighbours 1 and 2 both in range, 2 has the lower degree
        let net = Network::new(vec![p(0.0, 0.0), p(5.0, 0.0), p(-5.0, 0.0), p(10.0, 0.0), p(12.0, 3.0)], 6.0);
        let plan = localized_restore(&net, NodeId(0), 1).unwrap();
        assert_eq!(plan.moves[0].node, NodeId(2));
        // symmetric tie: smaller id
        let net = Network::new(vec![p(0.0, 0.0), p(5.0, 0.0), p(-5.0, 0.0)], 6.0);
        let plan = localized_restore(&net, NodeId(0), 1).unwrap();
        assert_eq!(plan.moves[0].node, NodeId(1));
    }

    #[test]
    fn basic_sends_a_spare_from_the_depot() {
        let net = Network::new(vec![p(500.0, 500.0), p(510.0, 500.0)], 20.0);
        let mut pool = SparePool { depot: p(0.0, 0.0), remaining: 1 };
        let plan = basic_restore(&net, NodeId(0), &mut pool).unwrap();
        assert!((plan.total_cost - 500.0 * 2f64.sqrt()).abs() < 1e-9);
        let mut after = net.without(NodeId(0));
        after.apply(&plan);
        assert_eq!(kappa(&after.graph()), kappa(&net.graph()));
        assert!(matches!(basic_restore(&net, NodeId(1), &mut pool), Err(RestoreError::Infeasible { .. })));
    }

    #[test]
    fn brute_force_refuses_large() {
        let net = Network::new((0..11).map(|i| p(i as f64, 0.0)).collect(), 5.0);
        assert_eq!(brute_force_optimal(&net, NodeId(0), 1, 3), Err(RestoreError::TooLarge(11)));
    }

    #[test]
    fn central_ledgers() {
        let net = Network::new((0..5).map(|i| p(10.0 * i as f64, 0.0)).collect(), 10.0);
        let plan = RestorationPlan::default();
        let basic = central_ledger(&net, NodeId(4), &plan, true);
        assert_eq!(basic.total_bytes(), MOVE_COMMAND_SIZE as u64);
        let full = central_ledger(&net, NodeId(4), &plan, false);
        // reports from 1, 2, 3 travel 1, 2, 3 hops; the failure report 3 hops
        let reports = neighbor_report_size(2) + 2 * neighbor_report_size(2) + 3 * neighbor_report_size(1);
        assert_eq!(full.total_bytes(), (reports + 3 * FAILURE_REPORT_SIZE) as u64);
        assert!(full.total_bytes() > basic.total_bytes());
    }
}
