//! Per-node restoration protocol.
//!
//! Phase 1 labels every node Trusted or Joint from its 2-hop view, falling back
//! to a network-wide path search when the view is inconclusive. Phase 2 moves
//! nodes into the positions of failed Joint nodes.
//!
//! Agents never touch the world directly: every handler returns [`Action`]s
//! that the simulator carries out.

mod agent;
pub mod imaginary;
mod search;

pub use agent::{Agent, AgentCounters};

use crate::graph::NodeId;
use crate::topology::{euclidean_cost, Position};

/// Simulated time in microseconds.
pub type Micros = u64;

pub const MILLIS: Micros = 1_000;
pub const SECONDS: Micros = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum NodeStatus {
    #[default]
    Joint,
    Trusted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub k: usize,
    pub beta: f64,
    pub range: f64,
    /// Settling delay before CreateGraph and before a search's first flood.
    pub ts: Micros,
    /// Each search round may take this many multiples of `ts`.
    pub round_timeout_factor: u64,
    /// Accept Trusted from the augmented local view without a global search.
    /// Off means every inconclusive or view-Trusted node asks the network.
    pub view_shortcut: bool,
}

impl ProtocolConfig {
    pub fn new(k: usize, beta: f64, range: f64) -> Self {
        ProtocolConfig {
            k,
            beta,
            range,
            ts: 500 * MILLIS,
            round_timeout_factor: 4,
            view_shortcut: true,
        }
    }
}

/// Identifies one global path search: initiator `x` asks whether its
/// neighbours `source` and `target` stay k-connected without it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SearchKey {
    pub initiator: NodeId,
    pub source: NodeId,
    pub target: NodeId,
    pub epoch: u32,
}

/// Which half of a node in the split residual network an Explore announces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Half {
    In,
    Out,
}

/// Residual arc a Confirm walks back over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfirmStep {
    /// The receiver's out-half fed the sender's in-half over a new flow edge.
    Forward,
    /// The sender cancelled flow it used to receive from the receiver.
    Reverse,
    /// Source to initiator: all rounds succeeded.
    Done,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Start {
        epoch: u32,
        pos: Position,
    },
    /// The sender's neighbours with their positions.
    Ngb {
        epoch: u32,
        gamma: Vec<(NodeId, Position)>,
    },
    /// `paths` lists the internal nodes of each locally known disjoint path
    /// from source to target, in order.
    Discover {
        key: SearchKey,
        paths: Vec<Vec<NodeId>>,
    },
    Explore {
        key: SearchKey,
        round: u8,
        half: Half,
    },
    Confirm {
        key: SearchKey,
        round: u8,
        step: ConfirmStep,
    },
    Stat {
        origin: NodeId,
        seq: u32,
        status: NodeStatus,
        sup: f64,
    },
    Beacon,
    Moved {
        mover: NodeId,
        old: Position,
        new: Position,
        /// The failed node followed by every node that moved in this
        /// episode, the mover last.
        chain: Vec<NodeId>,
        /// Whose position the mover took.
        filled: NodeId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    Start,
    Ngb,
    Discover,
    Explore,
    Confirm,
    Stat,
    Beacon,
    Moved,
    NeighborReport,
    FailureReport,
    MoveCommand,
}

impl MessageKind {
    pub const ALL: [MessageKind; 11] = [
        MessageKind::Start,
        MessageKind::Ngb,
        MessageKind::Discover,
        MessageKind::Explore,
        MessageKind::Confirm,
        MessageKind::Stat,
        MessageKind::Beacon,
        MessageKind::Moved,
        MessageKind::NeighborReport,
        MessageKind::FailureReport,
        MessageKind::MoveCommand,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::Start => "start",
            MessageKind::Ngb => "ngb",
            MessageKind::Discover => "discover",
            MessageKind::Explore => "explore",
            MessageKind::Confirm => "confirm",
            MessageKind::Stat => "stat",
            MessageKind::Beacon => "beacon",
            MessageKind::Moved => "moved",
            MessageKind::NeighborReport => "neighbor_report",
            MessageKind::FailureReport => "failure_report",
            MessageKind::MoveCommand => "move_command",
        }
    }
}

pub const ID_BYTES: usize = 2;
pub const COORD_BYTES: usize = 4;
pub const HEADER_BYTES: usize = 4;

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Start { .. } => MessageKind::Start,
            Message::Ngb { .. } => MessageKind::Ngb,
            Message::Discover { .. } => MessageKind::Discover,
            Message::Explore { .. } => MessageKind::Explore,
            Message::Confirm { .. } => MessageKind::Confirm,
            Message::Stat { .. } => MessageKind::Stat,
            Message::Beacon => MessageKind::Beacon,
            Message::Moved { .. } => MessageKind::Moved,
        }
    }

    /// Bytes on the air. Epochs, rounds, halves, steps and the search id ride
    /// in the header; a Discover spends one id slot per path as a separator.
    pub fn wire_size(&self) -> usize {
        let point = 2 * COORD_BYTES;
        HEADER_BYTES
            + match self {
                Message::Start { .. } => point,
                Message::Ngb { gamma, .. } => gamma.len() * (ID_BYTES + point),
                Message::Discover { paths, .. } => {
                    let entries: usize = paths.iter().map(|p| p.len() + 1).sum();
                    3 * ID_BYTES + entries * ID_BYTES
                }
                Message::Explore { .. } => 3 * ID_BYTES,
                Message::Confirm { .. } => ID_BYTES,
                Message::Stat { .. } => 1 + 4,
                Message::Beacon => 0,
                Message::Moved { chain, .. } => {
                    ID_BYTES + 2 * point + chain.len() * ID_BYTES + ID_BYTES
                }
            }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Timer {
    CreateGraph { epoch: u32 },
    ExploreStart { key: SearchKey },
    SearchTimeout { key: SearchKey },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Broadcast(Message),
    /// One-hop unicast.
    Send { to: NodeId, msg: Message },
    Timer { after: Micros, timer: Timer },
    /// Relocate now; always preceded by the matching Moved broadcast.
    Move { to: Position, target: NodeId },
}

/// What an agent knows about another node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborInfo {
    pub pos: Option<Position>,
    pub stat: Option<NodeStatus>,
    pub sup: Option<f64>,
}

/// Coverage-aware cost of moving a node at `from` with support `sup` to `to`.
pub fn aware_cost(from: Position, to: Position, sup: f64, beta: f64) -> f64 {
    euclidean_cost(from, to) / (1.0 + sup * beta)
}

/// Does candidate `v` beat `me` for the vacancy at `target`? On equal cost
/// the smaller id wins.
pub fn lower_cost(
    v: (NodeId, Position, f64),
    me: (NodeId, Position, f64),
    target: Position,
    beta: f64,
) -> bool {
    let cv = aware_cost(v.1, target, v.2, beta);
    let cu = aware_cost(me.1, target, me.2, beta);
    cv < cu || (cv == cu && v.0 < me.0)
}

/// Gate for following a Trusted neighbour that moved away.
pub fn follows_move(sup_mover: f64, sup_me: f64, beta: f64) -> bool {
    (sup_mover - sup_me) * beta > 1.0
}
