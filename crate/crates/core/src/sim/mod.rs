//! Discrete-event simulator for the protocol agents.
//!
//! Radio is an ideal unit disk: a broadcast reaches every live node within
//! range after a fixed latency and costs one transmission. Movement is
//! instantaneous. Beacons are evaluated inline on a fixed grid of ticks and
//! never enter the event queue, so an empty queue means the protocol is
//! quiet.

mod ledger;

pub use ledger::ByteLedger;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{bfs_distances, kappa, Graph, NodeId};
use crate::protocol::{
    Action, Agent, AgentCounters, Message, Micros, NodeStatus, ProtocolConfig, SearchKey, Timer,
    MILLIS, SECONDS,
};
use crate::topology::{euclidean_cost, in_range, unit_disk_graph, Position, Topology};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("no quiescence after {budget} events; oldest pending event at t={time}us: {event}")]
    EventBudget { budget: u64, time: Micros, event: String },
    #[error("node {0} is not alive")]
    NotAlive(NodeId),
    #[error("phase 1 has not run")]
    NotStarted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub protocol: ProtocolConfig,
    pub latency: Micros,
    pub beacon_period: Micros,
    pub failure_timeout: Micros,
    /// Quiet time before the post-restoration refresh, in multiples of ts.
    pub quiet_factor: u64,
    pub refresh: bool,
    pub event_budget: u64,
    pub trace: bool,
}

impl SimConfig {
    pub fn new(protocol: ProtocolConfig) -> Self {
        SimConfig {
            protocol,
            latency: 10 * MILLIS,
            beacon_period: 2 * SECONDS,
            failure_timeout: 10 * SECONDS,
            quiet_factor: 10,
            refresh: true,
            event_budget: 200_000_000,
            trace: false,
        }
    }
}

#[derive(Debug, Clone)]
enum EventKind {
    Deliver { to: NodeId, from: NodeId, msg: Arc<Message> },
    Timer { node: NodeId, timer: Timer },
}

#[derive(Debug, Clone)]
struct Event {
    time: Micros,
    ordinal: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.ordinal) == (other.time, other.ordinal)
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // min-heap on (time, ordinal)
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.ordinal).cmp(&(self.time, self.ordinal))
    }
}

/// Transmissions spent on one path search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchRecord {
    pub key: SearchKey,
    pub discover_tx: u32,
    pub explore_tx: u32,
    /// Maximum degree of the live network when the search began.
    pub max_degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveRecord {
    pub node: NodeId,
    pub from: Position,
    pub to: Position,
    /// The node whose position was taken.
    pub filled: NodeId,
}

/// Outcome of one failure and the restoration it triggered.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub failed: NodeId,
    pub failed_status: NodeStatus,
    pub moves: Vec<MoveRecord>,
    pub movement: f64,
    pub kappa_after: usize,
    /// Simulated time from failure to quiescence, refresh included.
    pub duration: Micros,
    pub bytes: u64,
    /// Live neighbours wrongly reported as failed.
    pub spurious_detections: usize,
}

#[derive(Debug, Clone)]
pub struct Sim {
    cfg: SimConfig,
    range: f64,
    positions: Vec<Position>,
    alive: Vec<bool>,
    agents: Vec<Agent>,
    queue: BinaryHeap<Event>,
    ordinal: u64,
    now: Micros,
    processed: u64,
    epoch: u32,
    started: bool,
    pub ledger: ByteLedger,
    searches: BTreeMap<SearchKey, SearchRecord>,
    dropped_sends: u64,
    trace: Vec<String>,
    moves: Vec<MoveRecord>,
    detections: Vec<(NodeId, NodeId)>,
}

impl Sim {
    pub fn new(topo: &Topology, cfg: SimConfig) -> Self {
        let agents = topo
            .positions
            .iter()
            .enumerate()
            .map(|(i, &p)| Agent::new(NodeId::from(i), p, cfg.protocol))
            .collect();
        Sim {
            cfg,
            range: topo.range,
            positions: topo.positions.clone(),
            alive: vec![true; topo.len()],
            agents,
            queue: BinaryHeap::new(),
            ordinal: 0,
            now: 0,
            processed: 0,
            epoch: 0,
            started: false,
            ledger: ByteLedger::new(topo.len()),
            searches: BTreeMap::new(),
            dropped_sends: 0,
            trace: Vec::new(),
            moves: Vec::new(),
            detections: Vec::new(),
        }
    }

    pub fn now(&self) -> Micros {
        self.now
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn is_alive(&self, v: NodeId) -> bool {
        self.alive[v.index()]
    }

    pub fn live_positions(&self) -> Vec<Position> {
        self.positions
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(&p, _)| p)
            .collect()
    }

    pub fn agent(&self, v: NodeId) -> &Agent {
        &self.agents[v.index()]
    }

    pub fn labels(&self) -> Vec<NodeStatus> {
        self.agents.iter().map(|a| a.status).collect()
    }

    pub fn searches(&self) -> impl Iterator<Item = &SearchRecord> {
        self.searches.values()
    }

    pub fn dropped_sends(&self) -> u64 {
        self.dropped_sends
    }

    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn moves(&self) -> &[MoveRecord] {
        &self.moves
    }

    /// Counters summed over all agents.
    pub fn counters(&self) -> AgentCounters {
        let mut c = AgentCounters::default();
        for a in &self.agents {
            let x = a.counters;
            c.searches_started += x.searches_started;
            c.searches_confirmed += x.searches_confirmed;
            c.searches_timed_out += x.searches_timed_out;
            c.stray_confirms += x.stray_confirms;
            c.stale_steps += x.stale_steps;
            c.explore_sent += x.explore_sent;
            c.trusted_by_view += x.trusted_by_view;
            c.joint_by_degree += x.joint_by_degree;
        }
        c
    }

    /// Unit-disk graph over live nodes; dead ids stay as empty slots.
    pub fn graph(&self) -> Graph {
        let mut g = unit_disk_graph(&self.positions, self.range);
        for (i, &a) in self.alive.iter().enumerate() {
            if !a {
                g.remove_node(NodeId::from(i));
            }
        }
        g
    }

    fn push(&mut self, time: Micros, kind: EventKind) {
        self.ordinal += 1;
        self.queue.push(Event {
            time,
            ordinal: self.ordinal,
            kind,
        });
    }

    fn receivers(&self, from: NodeId) -> Vec<NodeId> {
        let p = self.positions[from.index()];
        (0..self.positions.len())
            .filter(|&i| i != from.index() && self.alive[i] && in_range(p, self.positions[i], self.range))
            .map(NodeId::from)
            .collect()
    }

    /// One transmission heard by every live node in range.
    pub fn broadcast(&mut self, from: NodeId, msg: Message) -> usize {
        self.account(from, &msg);
        let msg = Arc::new(msg);
        let to = self.receivers(from);
        let at = self.now + self.cfg.latency;
        for &v in &to {
            self.push(
                at,
                EventKind::Deliver {
                    to: v,
                    from,
                    msg: Arc::clone(&msg),
                },
            );
        }
        to.len()
    }

    /// One-hop unicast; dropped when the destination is gone or out of range.
    pub fn send_to(&mut self, from: NodeId, to: NodeId, msg: Message) -> bool {
        self.account(from, &msg);
        let ok = self.alive[to.index()]
            && in_range(self.positions[from.index()], self.positions[to.index()], self.range);
        if ok {
            let at = self.now + self.cfg.latency;
            self.push(at, EventKind::Deliver { to, from, msg: Arc::new(msg) });
        } else {
            self.dropped_sends += 1;
        }
        ok
    }

    fn account(&mut self, from: NodeId, msg: &Message) {
        self.ledger.record(from, msg.kind(), msg.wire_size());
        if self.cfg.trace {
            self.trace.push(format!("{} tx {} {:?}", self.now, from.0, msg));
        }
        let key = match msg {
            Message::Discover { key, .. } | Message::Explore { key, .. } => *key,
            _ => return,
        };
        if !self.searches.contains_key(&key) {
            let delta = self.graph().max_degree();
            self.searches.insert(
                key,
                SearchRecord {
                    key,
                    discover_tx: 0,
                    explore_tx: 0,
                    max_degree: delta,
                },
            );
        }
        let rec = self.searches.get_mut(&key).expect("inserted");
        match msg {
            Message::Discover { .. } => rec.discover_tx += 1,
            _ => rec.explore_tx += 1,
        }
    }

    fn apply(&mut self, node: NodeId, actions: Vec<Action>) {
        for a in actions {
            match a {
                Action::Broadcast(msg) => {
                    self.broadcast(node, msg);
                }
                Action::Send { to, msg } => {
                    self.send_to(node, to, msg);
                }
                Action::Timer { after, timer } => {
                    self.push(self.now + after, EventKind::Timer { node, timer });
                }
                Action::Move { to, target } => {
                    let from = self.positions[node.index()];
                    self.positions[node.index()] = to;
                    self.moves.push(MoveRecord {
                        node,
                        from,
                        to,
                        filled: target,
                    });
                    if self.cfg.trace {
                        self.trace.push(format!("{} move {} -> {}", self.now, node.0, target.0));
                    }
                }
            }
        }
    }

    fn step(&mut self, ev: Event) {
        self.now = ev.time;
        self.processed += 1;
        match ev.kind {
            EventKind::Deliver { to, from, msg } => {
                if !self.alive[to.index()] {
                    return;
                }
                let out = self.agents[to.index()].on_message(self.now, from, &msg);
                self.apply(to, out);
            }
            EventKind::Timer { node, timer } => {
                if !self.alive[node.index()] {
                    return;
                }
                let out = self.agents[node.index()].on_timer(&timer);
                self.apply(node, out);
            }
        }
    }

    fn budget_error(&self) -> SimError {
        let oldest = self.queue.peek().expect("pending");
        SimError::EventBudget {
            budget: self.cfg.event_budget,
            time: oldest.time,
            event: format!("{:?}", oldest.kind),
        }
    }

    /// Processes protocol events until none remain; with beacons, ticks are
    /// interleaved (and keep going at least until `beacons_until`).
    fn run_until_quiet(&mut self, beacons: Option<(Micros, Micros)>) -> Result<(), SimError> {
        let (mut next_tick, until) = match beacons {
            Some((first, until)) => (first, until),
            None => (Micros::MAX, 0),
        };
        loop {
            if self.processed >= self.cfg.event_budget && !self.queue.is_empty() {
                return Err(self.budget_error());
            }
            let next_ev = self.queue.peek().map(|e| e.time);
            let tick_live = beacons.is_some() && (next_tick <= until || next_ev.is_some());
            match next_ev {
                Some(t) if !tick_live || t <= next_tick => {
                    let ev = self.queue.pop().expect("peeked");
                    self.step(ev);
                }
                _ if tick_live => {
                    self.now = next_tick;
                    self.beacon_tick();
                    next_tick += self.cfg.beacon_period;
                }
                _ => return Ok(()),
            }
        }
    }

    fn beacon_tick(&mut self) {
        let live: Vec<NodeId> = (0..self.alive.len())
            .filter(|&i| self.alive[i])
            .map(NodeId::from)
            .collect();
        for &u in &live {
            self.ledger.record(u, Message::Beacon.kind(), Message::Beacon.wire_size());
            for v in self.receivers(u) {
                self.agents[v.index()].on_beacon(self.now, u);
            }
        }
        for &u in &live {
            let (failed, out) = self.agents[u.index()].check_failures(self.now, self.cfg.failure_timeout);
            for w in failed {
                self.detections.push((u, w));
            }
            self.apply(u, out);
        }
    }

    /// Start, neighbour exchange, DetectState and every global search.
    pub fn run_phase1(&mut self) -> Result<(), SimError> {
        for i in 0..self.agents.len() {
            let out = self.agents[i].start();
            self.apply(NodeId::from(i), out);
        }
        self.run_until_quiet(None)?;
        self.started = true;
        // Prime the beacon bookkeeping so silence is measured from here.
        self.beacon_tick();
        Ok(())
    }

    /// Stops `failed`, lets its neighbours detect it and restore, then
    /// refreshes the nodes around every changed position.
    pub fn fail_and_restore(&mut self, failed: NodeId) -> Result<Episode, SimError> {
        if !self.started {
            return Err(SimError::NotStarted);
        }
        if !self.alive[failed.index()] {
            return Err(SimError::NotAlive(failed));
        }
        let t0 = self.now;
        let bytes0 = self.ledger.total_bytes();
        let moves0 = self.moves.len();
        let det0 = self.detections.len();
        let before = self.graph();
        let failed_status = self.agents[failed.index()].status;
        self.alive[failed.index()] = false;
        let deadline = t0 + self.cfg.failure_timeout + self.cfg.beacon_period + self.cfg.latency + 1;
        self.run_until_quiet(Some((t0 + self.cfg.beacon_period, deadline)))?;
        let moves = self.moves[moves0..].to_vec();
        if self.cfg.refresh {
            self.now += self.cfg.quiet_factor * self.cfg.protocol.ts;
            self.refresh(&before, failed, &moves);
            self.run_until_quiet(None)?;
        }
        let spurious = self.detections[det0..]
            .iter()
            .filter(|&&(_, w)| self.alive[w.index()])
            .count();
        let g = self.graph();
        Ok(Episode {
            failed,
            failed_status,
            movement: moves.iter().map(|m| euclidean_cost(m.from, m.to)).sum(),
            moves,
            kappa_after: kappa(&g),
            duration: self.now - t0,
            bytes: self.ledger.total_bytes() - bytes0,
            spurious_detections: spurious,
        })
    }

    fn refresh(&mut self, before: &Graph, failed: NodeId, moves: &[MoveRecord]) {
        let after = self.graph();
        let mut seeds = vec![failed];
        seeds.extend(moves.iter().map(|m| m.node));
        let mut region = BTreeSet::new();
        for g in [before, &after] {
            for &s in &seeds {
                if !g.contains(s) {
                    continue;
                }
                for (i, d) in bfs_distances(g, s).into_iter().enumerate() {
                    if d.is_some_and(|d| d <= 2) && self.alive[i] {
                        region.insert(NodeId::from(i));
                    }
                }
            }
        }
        let mut touched = region.clone();
        for &u in &region {
            touched.extend(after.neighbors(u).iter().copied());
        }
        self.epoch += 1;
        for u in touched {
            let out = self.agents[u.index()].begin_refresh(self.epoch, region.contains(&u));
            self.apply(u, out);
        }
    }

    /// Serialised failures of `order`, one episode each.
    pub fn run_failures(&mut self, order: &[NodeId]) -> Result<Vec<Episode>, SimError> {
        order.iter().map(|&v| self.fail_and_restore(v)).collect()
    }
}

/// `round(n · fraction)` distinct nodes in a seeded random order.
pub fn choose_failures(n: usize, fraction: f64, seed: u64) -> Vec<NodeId> {
    let count = ((n as f64) * fraction).round() as usize;
    let mut ids: Vec<NodeId> = (0..n).map(NodeId::from).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ids.truncate(count.min(n));
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_trusted_oracle;
    use crate::protocol::MessageKind;
    use crate::topology::Field;

    fn line(n: usize, gap: f64) -> Topology {
        let pos = (0..n).map(|i| Position::new(10.0 + gap * i as f64, 50.0)).collect();
        Topology::new(Field::new(200.0, 100.0), 20.0, pos)
    }

    fn sim(t: &Topology, k: usize) -> Sim {
        Sim::new(t, SimConfig::new(ProtocolConfig::new(k, 0.0, t.range)))
    }

    #[test]
    fn broadcast_counts_one_transmission() {
        let t = line(5, 15.0);
        let mut s = sim(&t, 1);
        assert_eq!(s.broadcast(NodeId(2), Message::Beacon), 2);
        assert_eq!(s.ledger.count_of(MessageKind::Beacon), 1);
        let lonely = line(1, 15.0);
        let mut s = sim(&lonely, 1);
        assert_eq!(s.broadcast(NodeId(0), Message::Stat { origin: NodeId(0), seq: 1, status: NodeStatus::Joint, sup: 0.0 }), 0);
        assert_eq!(s.ledger.total_bytes(), 9);
    }

    #[test]
    fn unicast_needs_range() {
        let t = line(3, 15.0);
        let mut s = sim(&t, 1);
        assert!(s.send_to(NodeId(0), NodeId(1), Message::Beacon));
        assert!(!s.send_to(NodeId(0), NodeId(2), Message::Beacon));
        assert_eq!(s.dropped_sends(), 1);
        assert_eq!(s.ledger.count_of(MessageKind::Beacon), 2);
    }

    #[test]
    fn phase1_on_a_path_marks_inner_nodes_joint() {
        let t = line(5, 15.0);
        let mut s = sim(&t, 1);
        s.run_phase1().unwrap();
        let g = t.graph();
        for v in g.nodes() {
            let want = is_trusted_oracle(&g, v).unwrap();
            assert_eq!(s.labels()[v.index()] == NodeStatus::Trusted, want, "node {v:?}");
        }
    }

    #[test]
    fn ring_needs_global_search() {
        // 8 nodes on a circle: every 2-hop view is a path, so each node must
        // confirm the far way round before it may call itself Trusted (k=1).
        let c = Position::new(50.0, 50.0);
        let pos = (0..8)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 8.0;
                Position::new(c.x + 25.0 * a.cos(), c.y + 25.0 * a.sin())
            })
            .collect();
        let t = Topology::new(Field::new(100.0, 100.0), 20.0, pos);
        let g = t.graph();
        assert_eq!(kappa(&g), 2);
        let mut s = sim(&t, 2);
        s.run_phase1().unwrap();
        assert!(s.labels().iter().all(|&l| l == NodeStatus::Joint));
        let mut s = sim(&t, 1);
        s.run_phase1().unwrap();
        assert!(s.labels().iter().all(|&l| l == NodeStatus::Trusted), "{:?}", s.counters());
        assert!(s.counters().searches_confirmed > 0);
    }

    #[test]
    fn no_failures_no_movement() {
        let t = line(4, 15.0);
        let mut s = sim(&t, 1);
        s.run_phase1().unwrap();
        assert!(s.run_failures(&[]).unwrap().is_empty());
        assert!(s.moves().is_empty());
    }

    #[test]
    fn joint_failure_on_a_path_is_filled() {
        let t = line(5, 15.0);
        let mut s = sim(&t, 1);
        s.run_phase1().unwrap();
        let ep = s.fail_and_restore(NodeId(2)).unwrap();
        assert_eq!(ep.failed_status, NodeStatus::Joint);
        assert!(!ep.moves.is_empty());
        assert_eq!(ep.moves[0].to, t.positions[2]);
        assert!(s.graph().is_connected());
        assert_eq!(ep.spurious_detections, 0);
    }

    #[test]
    fn failure_choice_is_seeded() {
        assert_eq!(choose_failures(50, 0.2, 7), choose_failures(50, 0.2, 7));
        assert_eq!(choose_failures(50, 0.2, 7).len(), 10);
        assert_ne!(choose_failures(50, 0.2, 7), choose_failures(50, 0.2, 8));
    }
}
