//! Property checks on one topology, for the `validate` verb.

use itertools::Itertools;

use super::sim_config;
use super::config::Timing;
use crate::graph::{
    disjoint_paths, is_k_connected, is_trusted_oracle, local_subgraph_2hop, vertex_connectivity, Graph, NodeId,
};
use crate::protocol::imaginary::build_imaginary_kconnected;
use crate::protocol::NodeStatus;
use crate::sim::Sim;
use crate::topology::Topology;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, failures: Vec<String>, total: usize) -> Check {
    Check {
        name,
        passed: failures.is_empty(),
        detail: match failures.first() {
            None => format!("{total} checked"),
            Some(f) => format!("{} of {total} failed, first: {f}", failures.len()),
        },
    }
}

fn separates(g: &Graph, cut: &[NodeId]) -> bool {
    let mut h = g.clone();
    for &c in cut {
        h.remove_node(c);
    }
    !h.is_connected()
}

/// Runs every check; `k` overrides the topology's declared connectivity.
pub fn validate_topology(topo: &Topology, k: Option<usize>, timing: Timing) -> Vec<Check> {
    let g = topo.graph();
    let k = k.unwrap_or(topo.k);
    let report = vertex_connectivity(&g).expect("nonempty topology");
    let mut out = Vec::new();

    out.push(Check {
        name: "declared-k",
        passed: report.kappa == topo.k,
        detail: format!("kappa {} declared {}", report.kappa, topo.k),
    });

    let nodes: Vec<NodeId> = g.nodes().collect();
    let pairs: Vec<(NodeId, NodeId)> = nodes.iter().copied().tuple_combinations().collect();
    let mut bad = Vec::new();
    let mut menger = usize::MAX;
    for &(x, y) in &pairs {
        let a = disjoint_paths(&g, x, y).expect("live");
        let b = disjoint_paths(&g, y, x).expect("live");
        if a != b {
            bad.push(format!("{x}-{y}: {a} vs {b}"));
        }
        if !g.has_edge(x, y) {
            menger = menger.min(a);
        }
    }
    out.push(check("path-symmetry", bad, pairs.len()));

    let expect = if menger == usize::MAX { g.node_count().saturating_sub(1) } else { menger };
    out.push(Check {
        name: "menger-consistency",
        passed: expect == report.kappa,
        detail: format!("pairwise minimum {expect}, kappa {}", report.kappa),
    });

    let cut_ok = g.is_complete() || (report.witness_cut.len() == report.kappa && separates(&g, &report.witness_cut));
    out.push(Check {
        name: "witness-cut",
        passed: cut_ok,
        detail: format!("cut {:?}", report.witness_cut.iter().map(|v| v.0).collect::<Vec<_>>()),
    });

    let mut local_bad = Vec::new();
    let mut view_bad = Vec::new();
    let mut instances = 0;
    for v in g.nodes() {
        let gv = local_subgraph_2hop(&g, v).expect("live");
        let aug = build_imaginary_kconnected(&gv, v, k);
        if !aug.success {
            continue;
        }
        instances += 1;
        for (&x, &y) in g.neighbors(v).iter().tuple_combinations() {
            let local = disjoint_paths(&aug.graph, x, y).expect("in view");
            let global = disjoint_paths(&g, x, y).expect("live");
            if local > global {
                local_bad.push(format!("node {v} pair {x}-{y}: {local} > {global}"));
            }
        }
        if is_k_connected(&aug.graph.without(v), k) && !is_trusted_oracle(&g, v).expect("live") {
            view_bad.push(format!("node {v}"));
        }
    }
    out.push(check("local-path-bound", local_bad, instances));
    out.push(check("view-soundness", view_bad, instances));

    let mut sim = Sim::new(topo, sim_config(k, 0.0, topo.range, timing));
    let labels = match sim.run_phase1() {
        Ok(()) => {
            let wrong: Vec<String> = g
                .nodes()
                .filter(|&v| (sim.agent(v).status == NodeStatus::Trusted) != is_trusted_oracle(&g, v).expect("live"))
                .map(|v| format!("node {v} labelled {:?}", sim.agent(v).status))
                .collect();
            check("phase1-labels", wrong, g.node_count())
        }
        Err(e) => Check {
            name: "phase1-labels",
            passed: false,
            detail: e.to_string(),
        },
    };
    out.push(labels);
    out
}
