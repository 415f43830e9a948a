//! Imaginary k-connected local subgraphs.
//!
//! A node only sees its 2-hop neighbourhood. Pairs of 2-hop nodes that are
//! poorly connected locally may well be joined by paths outside the view;
//! such pairs receive hypothetical edges until the local graph is k-connected.

use itertools::Itertools;

use crate::graph::{disjoint_paths_many, is_k_connected, Graph, NodeId};

/// Candidate sets up to this size are searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 20;

pub type Edge = (NodeId, NodeId);

#[derive(Debug, Clone)]
pub struct ImaginaryAugmentation {
    pub candidates: Vec<Edge>,
    pub chosen: Vec<Edge>,
    /// `gv` plus the chosen edges.
    pub graph: Graph,
    /// False when no subset of the candidates makes the view k-connected.
    pub success: bool,
}

fn two_hop_members(gv: &Graph, v: NodeId) -> Vec<NodeId> {
    gv.nodes().filter(|&u| u != v && !gv.has_edge(v, u)).collect()
}

/// Non-adjacent pairs of 2-hop members with fewer than `k` disjoint paths in
/// `gv`, in lexicographic order.
pub fn candidate_imaginary_edges(gv: &Graph, v: NodeId, k: usize) -> Vec<Edge> {
    let outer = two_hop_members(gv, v);
    let pairs: Vec<Edge> = outer
        .iter()
        .tuple_combinations()
        .filter(|&(&a, &b)| !gv.has_edge(a, b))
        .map(|(&a, &b)| (a, b))
        .collect();
    let counts = disjoint_paths_many(gv, &pairs, k).expect("members of gv");
    pairs
        .into_iter()
        .zip(counts)
        .filter(|&(_, c)| c < k)
        .map(|(e, _)| e)
        .collect()
}

/// Sum of disjoint-path counts over unordered pairs of `v`'s neighbours.
pub fn one_hop_path_sum(g: &Graph, v: NodeId) -> usize {
    let pairs: Vec<Edge> = g.neighbors(v).iter().copied().tuple_combinations().collect();
    disjoint_paths_many(g, &pairs, usize::MAX)
        .expect("neighbours of v")
        .into_iter()
        .sum()
}

fn with_edges(gv: &Graph, edges: impl IntoIterator<Item = Edge>) -> Graph {
    let mut g = gv.clone();
    for (a, b) in edges {
        g.add_edge(a, b).expect("candidate edges join distinct nodes");
    }
    g
}

/// Chooses imaginary edges making `gv` at least k-connected, with the fewest
/// edges first and the smallest 1-hop path sum second.
pub fn build_imaginary_kconnected(gv: &Graph, v: NodeId, k: usize) -> ImaginaryAugmentation {
    let candidates = candidate_imaginary_edges(gv, v, k);
    let chosen = if is_k_connected(gv, k) {
        Some(Vec::new())
    } else if candidates.len() <= EXHAUSTIVE_LIMIT {
        exhaustive(gv, v, k, &candidates)
    } else {
        greedy(gv, v, k, &candidates)
    };
    match chosen {
        Some(chosen) => ImaginaryAugmentation {
            graph: with_edges(gv, chosen.iter().copied()),
            candidates,
            chosen,
            success: true,
        },
        None => ImaginaryAugmentation {
            graph: gv.clone(),
            candidates,
            chosen: Vec::new(),
            success: false,
        },
    }
}

fn exhaustive(gv: &Graph, v: NodeId, k: usize, candidates: &[Edge]) -> Option<Vec<Edge>> {
    // Imaginary edges never touch v or its neighbours, so their degrees are final.
    if gv.nodes().filter(|&u| u == v || gv.has_edge(v, u)).any(|u| gv.degree(u) < k) {
        return None;
    }
    let mut deficit = vec![0usize; gv.slots()];
    for u in two_hop_members(gv, v) {
        deficit[u.index()] = k.saturating_sub(gv.degree(u));
    }
    let lower = deficit.iter().sum::<usize>().div_ceil(2);
    let mut gain = vec![0usize; gv.slots()];
    for size in lower..=candidates.len() {
        let mut best: Option<(usize, Vec<Edge>)> = None;
        for subset in candidates.iter().copied().combinations(size) {
            gain.iter_mut().for_each(|g| *g = 0);
            for &(a, b) in &subset {
                gain[a.index()] += 1;
                gain[b.index()] += 1;
            }
            if deficit.iter().zip(&gain).any(|(d, g)| g < d) {
                continue;
            }
            let g = with_edges(gv, subset.iter().copied());
            if !is_k_connected(&g, k) {
                continue;
            }
            let sum = one_hop_path_sum(&g, v);
            if best.as_ref().is_none_or(|(s, _)| sum < *s) {
                best = Some((sum, subset));
            }
        }
        if let Some((_, subset)) = best {
            return Some(subset);
        }
    }
    None
}

fn degree_shortfall(g: &Graph, k: usize) -> usize {
    g.nodes().map(|u| k.saturating_sub(g.degree(u))).sum()
}

fn greedy(gv: &Graph, v: NodeId, k: usize, candidates: &[Edge]) -> Option<Vec<Edge>> {
    let mut g = gv.clone();
    let mut chosen = Vec::new();
    let mut left: Vec<Edge> = candidates.to_vec();
    while !is_k_connected(&g, k) {
        // Highest connectivity, then largest degree-shortfall reduction, then
        // smallest 1-hop path sum; `left` is sorted so ties go to the
        // lexicographically first edge.
        let (at, _) = left
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let trial = with_edges(&g, [(a, b)]);
                let kappa = crate::graph::kappa(&trial).min(k);
                let key = (
                    std::cmp::Reverse(kappa),
                    degree_shortfall(&trial, k),
                    one_hop_path_sum(&trial, v),
                );
                (i, key)
            })
            .min_by(|x, y| x.1.cmp(&y.1))?;
        let e = left.remove(at);
        g.add_edge(e.0, e.1).expect("distinct endpoints");
        chosen.push(e);
    }
    Some(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::kappa;

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    #[test]
    fn complete_outer_ring_has_no_candidates() {
        // v=0, neighbours 1,2, outer 3,4 adjacent to each other
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (1, 3), (2, 4), (3, 4), (1, 4), (2, 3)]).unwrap();
        assert!(candidate_imaginary_edges(&g, n(0), 2).is_empty());
    }

    #[test]
    fn path_of_five_centre() {
        let g = Graph::path(5);
        assert_eq!(candidate_imaginary_edges(&g, n(2), 2), vec![(n(0), n(4))]);
    }

    #[test]
    fn already_k_connected_needs_nothing() {
        let g = Graph::cycle(5);
        let aug = build_imaginary_kconnected(&g, n(0), 2);
        assert!(aug.success);
        assert!(aug.chosen.is_empty());
    }

    #[test]
    fn single_edge_closes_the_ring() {
        // 0 is v; the ring 2-0-1 continues 1-3 and 2-4, outer 3,4 unlinked
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (1, 3), (2, 4), (1, 2)]).unwrap();
        let aug = build_imaginary_kconnected(&g, n(0), 2);
        assert!(aug.success);
        assert_eq!(aug.chosen, vec![(n(3), n(4))]);
        assert!(kappa(&aug.graph) >= 2);
    }

    #[test]
    fn chosen_edges_avoid_the_first_ring() {
        let g = Graph::path(5);
        let aug = build_imaginary_kconnected(&g, n(2), 2);
        assert!(aug.success);
        for &(a, b) in &aug.chosen {
            for x in [a, b] {
                assert!(x != n(2) && !g.has_edge(n(2), x));
            }
        }
    }

    #[test]
    fn infeasible_when_a_neighbour_is_too_thin() {
        // neighbour 1 has degree 1 < k
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (2, 3)]).unwrap();
        assert!(!build_imaginary_kconnected(&g, n(0), 2).success);
    }
}
