//! One node's share of a global path search.
//!
//! A search asks whether the initiator's neighbours `source` and `target` are
//! joined by k internally disjoint paths that avoid the initiator. It is a
//! distributed Ford-Fulkerson: the locally known paths seed the flow, and each
//! round floods the residual node-split network from the source. Explore
//! messages announce that the sender's in- or out-half became reachable; the
//! target answers the first arrival with a Confirm that walks the parent
//! pointers back to the source, rewriting the flow on the way.

use std::collections::BTreeSet;

use super::{Action, ConfirmStep, Half, Message, SearchKey};
use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InVia {
    /// Forward edge arc from the neighbour's out-half.
    Edge(NodeId),
    /// Reversed split arc from our own out-half.
    OwnOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutVia {
    OwnIn,
    /// Reversed edge arc: flow we used to send to this successor.
    Reverse(NodeId),
}

#[derive(Debug, Clone, Default)]
pub(super) struct Participant {
    /// Flow predecessor and successor when this node carries a path.
    pred: Option<NodeId>,
    succ: Option<NodeId>,
    /// Last hop of every path, kept by the target only.
    preds: BTreeSet<NodeId>,
    /// Augmenting rounds the source still has to run in total.
    rounds: u8,
    round: u8,
    reached_in: Option<InVia>,
    reached_out: Option<OutVia>,
    /// Explore broadcasts in the current round.
    pub sent: u8,
}

fn explore(key: SearchKey, round: u8, half: Half) -> Action {
    Action::Broadcast(Message::Explore { key, round, half })
}

fn confirm(to: NodeId, key: SearchKey, round: u8, step: ConfirmStep) -> Action {
    Action::Send {
        to,
        msg: Message::Confirm { key, round, step },
    }
}

impl Participant {
    /// Seeds roles from the initiator's locally found paths.
    pub fn seed(&mut self, me: NodeId, key: SearchKey, paths: &[Vec<NodeId>], k: usize) {
        for inner in paths {
            let full: Vec<NodeId> = std::iter::once(key.source)
                .chain(inner.iter().copied())
                .chain(std::iter::once(key.target))
                .collect();
            for w in full.windows(2) {
                if w[1] == me && me != key.target {
                    self.pred = Some(w[0]);
                }
                if w[0] == me && me != key.source {
                    self.succ = Some(w[1]);
                }
            }
            if me == key.target {
                self.preds.insert(full[full.len() - 2]);
            }
        }
        if me == key.source {
            self.rounds = k.saturating_sub(paths.len()) as u8;
        }
        self.round = self.round.max(1);
    }

    pub fn carries_flow(&self) -> bool {
        self.pred.is_some()
    }

    fn sync(&mut self, round: u8) -> bool {
        if round < self.round {
            return false;
        }
        if round > self.round {
            self.round = round;
            self.reached_in = None;
            self.reached_out = None;
            self.sent = 0;
        }
        true
    }

    fn announce(&mut self, key: SearchKey, half: Half) -> Action {
        self.sent += 1;
        explore(key, self.round, half)
    }

    /// `from`'s out-half is reachable.
    pub fn on_out(&mut self, me: NodeId, key: SearchKey, round: u8, from: NodeId) -> Vec<Action> {
        if !self.sync(round) || self.reached_in.is_some() {
            return Vec::new();
        }
        if me == key.target {
            if self.preds.contains(&from) {
                return Vec::new();
            }
            self.reached_in = Some(InVia::Edge(from));
            return self.trace_in(me, key);
        }
        // Arcs from our own flow neighbours lead nowhere new.
        if self.pred == Some(from) || self.succ == Some(from) {
            return Vec::new();
        }
        self.reached_in = Some(InVia::Edge(from));
        if self.carries_flow() {
            vec![self.announce(key, Half::In)]
        } else {
            self.reached_out = Some(OutVia::OwnIn);
            vec![self.announce(key, Half::Out)]
        }
    }

    /// `from`'s in-half is reachable; only its flow predecessor can continue.
    pub fn on_in(&mut self, key: SearchKey, round: u8, from: NodeId) -> Vec<Action> {
        if !self.sync(round) || self.succ != Some(from) || self.reached_out.is_some() {
            return Vec::new();
        }
        self.reached_out = Some(OutVia::Reverse(from));
        let mut out = vec![self.announce(key, Half::Out)];
        if self.reached_in.is_none() {
            self.reached_in = Some(InVia::OwnOut);
            out.push(self.announce(key, Half::In));
        }
        out
    }

    fn trace_in(&mut self, me: NodeId, key: SearchKey) -> Vec<Action> {
        match self.reached_in {
            Some(InVia::Edge(y)) => {
                if me == key.target {
                    self.preds.insert(y);
                } else {
                    self.pred = Some(y);
                }
                vec![confirm(y, key, self.round, ConfirmStep::Forward)]
            }
            Some(InVia::OwnOut) => self.trace_out(me, key),
            None => Vec::new(),
        }
    }

    fn trace_out(&mut self, me: NodeId, key: SearchKey) -> Vec<Action> {
        match self.reached_out {
            Some(OutVia::OwnIn) => self.trace_in(me, key),
            Some(OutVia::Reverse(s)) => {
                if self.succ == Some(s) {
                    self.succ = None;
                }
                vec![confirm(s, key, self.round, ConfirmStep::Reverse)]
            }
            None => Vec::new(),
        }
    }

    /// A Confirm walking back towards the source. Returns `None` when it
    /// belongs to another round.
    pub fn on_confirm(
        &mut self,
        me: NodeId,
        key: SearchKey,
        round: u8,
        step: ConfirmStep,
        from: NodeId,
    ) -> Option<Vec<Action>> {
        if round != self.round {
            return None;
        }
        Some(match step {
            ConfirmStep::Forward if me == key.source => self.next_round(key),
            ConfirmStep::Forward => {
                self.succ = Some(from);
                self.trace_out(me, key)
            }
            ConfirmStep::Reverse => {
                if self.pred == Some(from) {
                    self.pred = None;
                }
                if me == key.target {
                    self.preds.remove(&from);
                }
                self.trace_in(me, key)
            }
            ConfirmStep::Done => Vec::new(),
        })
    }

    /// Source side: a round found one more path.
    fn next_round(&mut self, key: SearchKey) -> Vec<Action> {
        if self.round < self.rounds {
            self.round += 1;
            vec![explore(key, self.round, Half::Out)]
        } else {
            vec![confirm(key.initiator, key, self.round, ConfirmStep::Done)]
        }
    }
}
