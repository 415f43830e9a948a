use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::imaginary::build_imaginary_kconnected;
use super::search::Participant;
use super::{
    follows_move, lower_cost, Action, ConfirmStep, Half, Message, Micros, NeighborInfo,
    NodeStatus, ProtocolConfig, SearchKey, Timer,
};
use crate::coverage::support_degree;
use crate::graph::{disjoint_path_packing, is_k_connected, Graph, NodeId};
use crate::topology::{in_range, Position};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AgentCounters {
    pub searches_started: usize,
    pub searches_confirmed: usize,
    pub searches_timed_out: usize,
    /// Confirms for searches this node never started or already gave up.
    pub stray_confirms: usize,
    /// Traceback steps that arrived for a finished round.
    pub stale_steps: usize,
    pub explore_sent: usize,
    /// DetectState outcomes.
    pub trusted_by_view: usize,
    pub joint_by_degree: usize,
}

/// One node's protocol state.
#[derive(Debug, Clone)]
pub struct Agent {
    pub me: NodeId,
    pub pos: Position,
    cfg: ProtocolConfig,
    pub status: NodeStatus,
    pub sup: f64,
    epoch: u32,
    gamma: BTreeSet<NodeId>,
    /// Neighbour lists as last reported in Ngb.
    reported: BTreeMap<NodeId, Vec<NodeId>>,
    ngb_epoch: HashMap<NodeId, u32>,
    info: BTreeMap<NodeId, NeighborInfo>,
    targets: BTreeSet<SearchKey>,
    abandoned: BTreeSet<SearchKey>,
    discover_seen: HashSet<SearchKey>,
    searches: HashMap<SearchKey, Participant>,
    create_scheduled: bool,
    created: bool,
    awaiting_detect: bool,
    detected: bool,
    gone: BTreeSet<NodeId>,
    last_heard: BTreeMap<NodeId, Micros>,
    stat_seq: u32,
    stat_seen: HashMap<NodeId, u32>,
    stat_relayed: HashMap<NodeId, u32>,
    moved: bool,
    pub counters: AgentCounters,
}

impl Agent {
    pub fn new(me: NodeId, pos: Position, cfg: ProtocolConfig) -> Self {
        Agent {
            me,
            pos,
            cfg,
            status: NodeStatus::Joint,
            sup: 0.0,
            epoch: 0,
            gamma: BTreeSet::new(),
            reported: BTreeMap::new(),
            ngb_epoch: HashMap::new(),
            info: BTreeMap::new(),
            targets: BTreeSet::new(),
            abandoned: BTreeSet::new(),
            discover_seen: HashSet::new(),
            searches: HashMap::new(),
            create_scheduled: false,
            created: false,
            awaiting_detect: true,
            detected: false,
            gone: BTreeSet::new(),
            last_heard: BTreeMap::new(),
            stat_seq: 0,
            stat_seen: HashMap::new(),
            stat_relayed: HashMap::new(),
            moved: false,
            counters: AgentCounters::default(),
        }
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.cfg
    }

    pub fn neighbors(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.gamma.iter().copied()
    }

    pub fn info(&self, v: NodeId) -> Option<&NeighborInfo> {
        self.info.get(&v)
    }

    /// Pending search targets (T_u).
    pub fn targets(&self) -> impl Iterator<Item = &SearchKey> {
        self.targets.iter()
    }

    pub fn has_detected(&self) -> bool {
        self.detected
    }

    pub fn start(&mut self) -> Vec<Action> {
        self.create_scheduled = true;
        vec![
            Action::Broadcast(Message::Start {
                epoch: self.epoch,
                pos: self.pos,
            }),
            Action::Timer {
                after: self.cfg.ts,
                timer: Timer::CreateGraph { epoch: self.epoch },
            },
        ]
    }

    /// Re-runs the neighbour exchange after a topology change. Only nodes
    /// with `redetect` recompute their status.
    pub fn begin_refresh(&mut self, epoch: u32, redetect: bool) -> Vec<Action> {
        self.epoch = epoch;
        self.moved = false;
        self.created = false;
        self.create_scheduled = true;
        if redetect {
            // Rebuilt from this round's Start messages.
            self.gamma.clear();
            self.awaiting_detect = true;
        }
        vec![
            Action::Broadcast(Message::Start { epoch, pos: self.pos }),
            Action::Timer {
                after: self.cfg.ts,
                timer: Timer::CreateGraph { epoch },
            },
        ]
    }

    pub fn on_message(&mut self, now: Micros, from: NodeId, msg: &Message) -> Vec<Action> {
        match msg {
            Message::Start { pos, .. } => self.on_start(now, from, *pos),
            Message::Ngb { epoch, gamma } => self.on_ngb(from, *epoch, gamma),
            Message::Discover { key, paths } => self.on_discover(from, *key, paths),
            Message::Explore { key, round, half } => self.on_explore(from, *key, *round, *half),
            Message::Confirm { key, round, step } => self.on_confirm(from, *key, *round, *step),
            Message::Stat {
                origin,
                seq,
                status,
                sup,
            } => self.on_stat(from, *origin, *seq, *status, *sup),
            Message::Beacon => {
                self.on_beacon(now, from);
                Vec::new()
            }
            Message::Moved {
                mover,
                old,
                new,
                chain,
                ..
            } => self.on_moved(now, *mover, *old, *new, chain),
        }
    }

    pub fn on_timer(&mut self, timer: &Timer) -> Vec<Action> {
        match *timer {
            Timer::CreateGraph { epoch } => self.create_graph(epoch),
            Timer::ExploreStart { key } => self
                .searches
                .get_mut(&key)
                .map(|p| {
                    let out = p.on_out(self.me, key, 1, key.source);
                    self.counters.explore_sent +=
                        out.iter().filter(|a| matches!(a, Action::Broadcast(_))).count();
                    out
                })
                .unwrap_or_default(),
            Timer::SearchTimeout { key } => {
                if self.targets.remove(&key) {
                    self.abandoned.insert(key);
                    self.counters.searches_timed_out += 1;
                }
                Vec::new()
            }
        }
    }

    fn on_start(&mut self, now: Micros, from: NodeId, pos: Position) -> Vec<Action> {
        self.gamma.insert(from);
        self.gone.remove(&from);
        self.info
            .entry(from)
            .and_modify(|i| i.pos = Some(pos))
            .or_insert(NeighborInfo {
                pos: Some(pos),
                stat: None,
                sup: None,
            });
        self.last_heard.insert(from, now);
        if self.create_scheduled {
            return Vec::new();
        }
        self.create_scheduled = true;
        vec![Action::Timer {
            after: self.cfg.ts,
            timer: Timer::CreateGraph { epoch: self.epoch },
        }]
    }

    fn create_graph(&mut self, epoch: u32) -> Vec<Action> {
        if epoch != self.epoch {
            return Vec::new();
        }
        self.created = true;
        let gamma = self
            .gamma
            .iter()
            .filter_map(|&w| self.info.get(&w).and_then(|i| i.pos).map(|p| (w, p)))
            .collect();
        let mut out = vec![Action::Broadcast(Message::Ngb { epoch, gamma })];
        out.extend(self.maybe_detect());
        out
    }

    fn on_ngb(&mut self, from: NodeId, epoch: u32, gamma: &[(NodeId, Position)]) -> Vec<Action> {
        self.reported
            .insert(from, gamma.iter().map(|&(v, _)| v).collect());
        for &(v, pos) in gamma {
            if v == self.me {
                continue;
            }
            self.info
                .entry(v)
                .and_modify(|i| i.pos = Some(pos))
                .or_insert(NeighborInfo {
                    pos: Some(pos),
                    stat: None,
                    sup: None,
                });
        }
        self.ngb_epoch.insert(from, epoch);
        self.maybe_detect()
    }

    fn maybe_detect(&mut self) -> Vec<Action> {
        let ready = self.awaiting_detect
            && self.created
            && self
                .gamma
                .iter()
                .all(|w| self.ngb_epoch.get(w) == Some(&self.epoch));
        if !ready {
            return Vec::new();
        }
        self.awaiting_detect = false;
        self.detect_state()
    }

    /// The 2-hop view: every node heard of directly or through a neighbour's
    /// Ngb, joined by the unit-disk rule over the known positions.
    pub fn local_graph(&self) -> Graph {
        let mut members: BTreeSet<NodeId> = self.gamma.clone();
        for w in &self.gamma {
            if let Some(list) = self.reported.get(w) {
                members.extend(list.iter().copied());
            }
        }
        members.remove(&self.me);
        let placed: Vec<(NodeId, Position)> = std::iter::once((self.me, self.pos))
            .chain(
                members
                    .iter()
                    .filter(|v| !self.gone.contains(v))
                    .filter_map(|&v| self.info.get(&v).and_then(|i| i.pos).map(|p| (v, p))),
            )
            .collect();
        let slots = placed.iter().map(|(v, _)| v.index() + 1).max().unwrap_or(0);
        let mut g = Graph::empty_slots(slots);
        for &(v, _) in &placed {
            g.insert_node(v);
        }
        for (i, &(a, pa)) in placed.iter().enumerate() {
            for &(b, pb) in &placed[i + 1..] {
                if in_range(pa, pb, self.cfg.range) {
                    g.add_edge(a, b).expect("distinct ids");
                }
            }
        }
        g
    }

    fn detect_state(&mut self) -> Vec<Action> {
        let k = self.cfg.k;
        let gv = self.local_graph();
        self.sup = support_degree(&gv, self.me, k.max(1)).unwrap_or(0.0);
        self.status = NodeStatus::Joint;
        self.targets.clear();
        self.abandoned.clear();
        self.detected = true;
        let mut out = Vec::new();
        let nbrs: Vec<NodeId> = gv.neighbors(self.me).to_vec();
        if !nbrs.is_empty() && nbrs.iter().all(|&u| gv.degree(u) > k) {
            let aug = build_imaginary_kconnected(&gv, self.me, k);
            if self.cfg.view_shortcut && aug.success && is_k_connected(&aug.graph.without(self.me), k) {
                self.status = NodeStatus::Trusted;
                self.counters.trusted_by_view += 1;
            } else {
                out = self.start_searches(&gv, &nbrs);
                if self.targets.is_empty() {
                    self.status = NodeStatus::Trusted;
                }
            }
        } else {
            self.counters.joint_by_degree += 1;
        }
        out.push(self.stat());
        out
    }

    /// One search per neighbour pair with fewer than k disjoint paths in the
    /// real view without this node.
    fn start_searches(&mut self, gv: &Graph, nbrs: &[NodeId]) -> Vec<Action> {
        let k = self.cfg.k;
        let real = gv.without(self.me);
        let mut out = Vec::new();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                let packing = disjoint_path_packing(&real, a, b, k).expect("neighbours are in the view");
                if packing.len() >= k {
                    continue;
                }
                let key = SearchKey {
                    initiator: self.me,
                    source: a,
                    target: b,
                    epoch: self.epoch,
                };
                let rounds = (k - packing.len()) as u64;
                self.targets.insert(key);
                self.counters.searches_started += 1;
                let paths = packing
                    .paths
                    .iter()
                    .map(|p| p[1..p.len() - 1].to_vec())
                    .collect();
                out.push(Action::Broadcast(Message::Discover { key, paths }));
                out.push(Action::Timer {
                    after: self.cfg.ts + rounds * self.cfg.round_timeout_factor * self.cfg.ts,
                    timer: Timer::SearchTimeout { key },
                });
            }
        }
        out
    }

    fn stat(&mut self) -> Action {
        self.stat_seq += 1;
        Action::Broadcast(Message::Stat {
            origin: self.me,
            seq: self.stat_seq,
            status: self.status,
            sup: self.sup,
        })
    }

    fn on_discover(&mut self, from: NodeId, key: SearchKey, paths: &[Vec<NodeId>]) -> Vec<Action> {
        if key.initiator == self.me || !self.discover_seen.insert(key) {
            return Vec::new();
        }
        let mut out = Vec::new();
        if from == key.initiator {
            out.push(Action::Broadcast(Message::Discover {
                key,
                paths: paths.to_vec(),
            }));
        }
        self.searches
            .entry(key)
            .or_default()
            .seed(self.me, key, paths, self.cfg.k);
        if self.gamma.contains(&key.source) && self.me != key.source {
            out.push(Action::Timer {
                after: self.cfg.ts,
                timer: Timer::ExploreStart { key },
            });
        }
        out
    }

    fn on_explore(&mut self, from: NodeId, key: SearchKey, round: u8, half: Half) -> Vec<Action> {
        if key.initiator == self.me || key.source == self.me {
            return Vec::new();
        }
        let part = self.searches.entry(key).or_default();
        let out = match half {
            Half::Out => part.on_out(self.me, key, round, from),
            Half::In => part.on_in(key, round, from),
        };
        self.counters.explore_sent += out
            .iter()
            .filter(|a| matches!(a, Action::Broadcast(_)))
            .count();
        out
    }

    fn on_confirm(&mut self, from: NodeId, key: SearchKey, round: u8, step: ConfirmStep) -> Vec<Action> {
        if step == ConfirmStep::Done {
            if key.initiator != self.me || !self.targets.remove(&key) {
                self.counters.stray_confirms += 1;
                return Vec::new();
            }
            self.counters.searches_confirmed += 1;
            if self.targets.is_empty() && self.abandoned.is_empty() && self.status == NodeStatus::Joint {
                self.status = NodeStatus::Trusted;
                return vec![self.stat()];
            }
            return Vec::new();
        }
        let Some(part) = self.searches.get_mut(&key) else {
            self.counters.stale_steps += 1;
            return Vec::new();
        };
        match part.on_confirm(self.me, key, round, step, from) {
            Some(out) => {
                self.counters.explore_sent += out
                    .iter()
                    .filter(|a| matches!(a, Action::Broadcast(_)))
                    .count();
                out
            }
            None => {
                self.counters.stale_steps += 1;
                Vec::new()
            }
        }
    }

    fn on_stat(&mut self, from: NodeId, origin: NodeId, seq: u32, status: NodeStatus, sup: f64) -> Vec<Action> {
        if origin == self.me {
            return Vec::new();
        }
        let mut out = Vec::new();
        // Neighbours pass each Stat on once so it reaches 2 hops.
        if from == origin && self.stat_relayed.get(&origin).is_none_or(|&s| s < seq) {
            self.stat_relayed.insert(origin, seq);
            out.push(Action::Broadcast(Message::Stat {
                origin,
                seq,
                status,
                sup,
            }));
        }
        if self.stat_seen.get(&origin).is_none_or(|&s| s < seq) {
            self.stat_seen.insert(origin, seq);
            let entry = self.info.entry(origin).or_insert(NeighborInfo {
                pos: None,
                stat: None,
                sup: None,
            });
            entry.stat = Some(status);
            entry.sup = Some(sup);
        }
        out
    }

    pub fn on_beacon(&mut self, now: Micros, from: NodeId) {
        if self.gamma.contains(&from) {
            self.last_heard.insert(from, now);
        }
    }

    /// Neighbours silent for longer than `timeout`; each is reported once and
    /// may trigger a move.
    pub fn check_failures(&mut self, now: Micros, timeout: Micros) -> (Vec<NodeId>, Vec<Action>) {
        let silent: Vec<NodeId> = self
            .gamma
            .iter()
            .copied()
            .filter(|w| self.last_heard.get(w).is_none_or(|&t| now.saturating_sub(t) > timeout))
            .collect();
        let mut out = Vec::new();
        for &w in &silent {
            self.gamma.remove(&w);
            self.gone.insert(w);
            self.last_heard.remove(&w);
            out.extend(self.on_failure(now, w));
        }
        (silent, out)
    }

    fn stat_of(&self, v: NodeId) -> NodeStatus {
        self.info.get(&v).and_then(|i| i.stat).unwrap_or(NodeStatus::Joint)
    }

    fn on_failure(&mut self, now: Micros, w: NodeId) -> Vec<Action> {
        if self.stat_of(w) != NodeStatus::Joint {
            return Vec::new();
        }
        let Some(target) = self.info.get(&w).and_then(|i| i.pos) else {
            return Vec::new();
        };
        self.update(now, w, target, &[w], true)
    }

    /// Decides whether this node fills the vacancy left by `w` at `target`.
    /// `chain` lists the failed node and every node that already moved.
    fn update(&mut self, now: Micros, w: NodeId, target: Position, chain: &[NodeId], joint_vacancy: bool) -> Vec<Action> {
        if self.moved || chain.contains(&self.me) {
            return Vec::new();
        }
        let beta = self.cfg.beta;
        // only Trusted nodes' support biases the cost
        let eff = |sup: f64, st: NodeStatus| if st == NodeStatus::Trusted { sup } else { 0.0 };
        let me = (self.me, self.pos, eff(self.sup, self.status));
        let rivals: Vec<(NodeId, Position, f64, NodeStatus)> = self
            .reported
            .get(&w)
            .into_iter()
            .flatten()
            .copied()
            .filter(|&v| v != self.me && v != w && !chain.contains(&v) && !self.gone.contains(&v))
            .filter_map(|v| {
                let i = self.info.get(&v)?;
                let st = i.stat.unwrap_or(NodeStatus::Joint);
                Some((v, i.pos?, eff(i.sup.unwrap_or(0.0), st), st))
            })
            .collect();
        let beats = |r: &(NodeId, Position, f64, NodeStatus)| lower_cost((r.0, r.1, r.2), me, target, beta);
        let go = match self.status {
            NodeStatus::Trusted => !rivals.iter().any(|r| r.3 == NodeStatus::Trusted && beats(r)),
            NodeStatus::Joint if joint_vacancy => {
                !rivals.iter().any(|r| r.3 == NodeStatus::Trusted || beats(r))
            }
            NodeStatus::Joint => false,
        };
        if !go {
            return Vec::new();
        }
        self.relocate(now, w, target, chain)
    }

    fn relocate(&mut self, now: Micros, w: NodeId, target: Position, chain: &[NodeId]) -> Vec<Action> {
        let old = self.pos;
        let mut chain = chain.to_vec();
        chain.push(self.me);
        self.moved = true;
        self.pos = target;
        let range = self.cfg.range;
        let near: BTreeSet<NodeId> = self
            .info
            .iter()
            .filter(|(v, i)| {
                **v != w && !self.gone.contains(v) && i.pos.is_some_and(|p| in_range(p, target, range))
            })
            .map(|(v, _)| *v)
            .collect();
        self.gamma = near;
        self.last_heard = self.gamma.iter().map(|&v| (v, now)).collect();
        vec![
            Action::Broadcast(Message::Moved {
                mover: self.me,
                old,
                new: target,
                chain,
                filled: w,
            }),
            Action::Move { to: target, target: w },
        ]
    }

    fn effective_sup(&self) -> f64 {
        if self.status == NodeStatus::Trusted {
            self.sup
        } else {
            0.0
        }
    }

    fn on_moved(&mut self, now: Micros, mover: NodeId, old: Position, new: Position, chain: &[NodeId]) -> Vec<Action> {
        if let Some(i) = self.info.get_mut(&mover) {
            i.pos = Some(new);
        }
        if !in_range(self.pos, new, self.cfg.range) {
            self.gamma.remove(&mover);
            self.last_heard.remove(&mover);
        }
        if let Some(&failed) = chain.first() {
            if self.gamma.remove(&failed) {
                self.gone.insert(failed);
                self.last_heard.remove(&failed);
            }
        }
        // Reuse the mover's old neighbour list for the vacancy it left.
        let mover_status = self.stat_of(mover);
        let sup_mover = self.info.get(&mover).and_then(|i| i.sup).unwrap_or(0.0);
        match mover_status {
            NodeStatus::Joint => self.update(now, mover, old, chain, true),
            NodeStatus::Trusted if follows_move(sup_mover, self.effective_sup(), self.cfg.beta) => {
                self.update(now, mover, old, chain, false)
            }
            NodeStatus::Trusted => Vec::new(),
        }
    }
}
