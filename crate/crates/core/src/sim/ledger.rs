use crate::graph::NodeId;
use crate::protocol::MessageKind;

const KINDS: usize = MessageKind::ALL.len();

fn slot(kind: MessageKind) -> usize {
    MessageKind::ALL.iter().position(|&k| k == kind).expect("listed kind")
}

/// Sent bytes and message counts per node and kind. One broadcast is one
/// transmission no matter how many nodes hear it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ByteLedger {
    bytes: Vec<[u64; KINDS]>,
    counts: Vec<[u64; KINDS]>,
}

impl ByteLedger {
    pub fn new(nodes: usize) -> Self {
        ByteLedger {
            bytes: vec![[0; KINDS]; nodes],
            counts: vec![[0; KINDS]; nodes],
        }
    }

    pub fn record(&mut self, node: NodeId, kind: MessageKind, bytes: usize) {
        let i = node.index();
        if i >= self.bytes.len() {
            self.bytes.resize(i + 1, [0; KINDS]);
            self.counts.resize(i + 1, [0; KINDS]);
        }
        self.bytes[i][slot(kind)] += bytes as u64;
        self.counts[i][slot(kind)] += 1;
    }

    pub fn merge(&mut self, other: &ByteLedger) {
        let n = self.bytes.len().max(other.bytes.len());
        self.bytes.resize(n, [0; KINDS]);
        self.counts.resize(n, [0; KINDS]);
        for (i, (b, c)) in other.bytes.iter().zip(&other.counts).enumerate() {
            for s in 0..KINDS {
                self.bytes[i][s] += b[s];
                self.counts[i][s] += c[s];
            }
        }
    }

    pub fn bytes_of(&self, kind: MessageKind) -> u64 {
        self.bytes.iter().map(|b| b[slot(kind)]).sum()
    }

    pub fn count_of(&self, kind: MessageKind) -> u64 {
        self.counts.iter().map(|c| c[slot(kind)]).sum()
    }

    /// Everything a node sent except beacons.
    pub fn node_bytes(&self, node: NodeId) -> u64 {
        let beacon = slot(MessageKind::Beacon);
        self.bytes.get(node.index()).map_or(0, |b| {
            b.iter().enumerate().filter(|&(s, _)| s != beacon).map(|(_, v)| v).sum()
        })
    }

    /// Headline sent-bytes metric: all kinds but beacons.
    pub fn total_bytes(&self) -> u64 {
        MessageKind::ALL
            .iter()
            .filter(|&&k| k != MessageKind::Beacon)
            .map(|&k| self.bytes_of(k))
            .sum()
    }

    pub fn total_messages(&self) -> u64 {
        MessageKind::ALL
            .iter()
            .filter(|&&k| k != MessageKind::Beacon)
            .map(|&k| self.count_of(k))
            .sum()
    }

    pub fn nodes(&self) -> usize {
        self.bytes.len()
    }
}
