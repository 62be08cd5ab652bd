use std::collections::BTreeSet;

use crate::graph::IdeaGraph;
use crate::kinds::{EdgeKind, NodeKind};

fn is_backbone_relation(kind: EdgeKind) -> bool {
    matches!(kind, EdgeKind::Supports | EdgeKind::DependsOn | EdgeKind::Refines)
}

/// The problem-hypothesis-method-evaluation scaffold of a committed graph,
/// with its interconnecting edges, embedded evidence, and attached repairs.
pub fn extract_backbone(graph: &IdeaGraph) -> IdeaGraph {
    let slots: BTreeSet<&str> = graph
        .active_nodes()
        .filter(|n| n.kind.is_slot())
        .map(|n| n.id.as_str())
        .collect();

    let mut node_ids: BTreeSet<String> = slots.iter().map(|s| s.to_string()).collect();
    let mut edge_ids: BTreeSet<String> = BTreeSet::new();
    for e in graph.live_edges() {
        if is_backbone_relation(e.kind) && slots.contains(e.src.as_str()) && slots.contains(e.dst.as_str()) {
            edge_ids.insert(e.id.clone());
        }
        if e.kind == EdgeKind::Repairs
            && slots.contains(e.dst.as_str())
            && graph.nodes[&e.src].kind == NodeKind::Repair
        {
            node_ids.insert(e.src.clone());
            edge_ids.insert(e.id.clone());
        }
    }

    let mut out = IdeaGraph::new(graph.group_id.clone());
    out.round = graph.round;
    out.clock = graph.clock;
    for id in &node_ids {
        out.nodes.insert(id.clone(), graph.nodes[id].clone());
    }
    for id in &edge_ids {
        out.edges.insert(id.clone(), graph.edges[id].clone());
    }
    for (id, branch) in &graph.branches {
        let mut b = branch.clone();
        b.node_ids.retain(|n| node_ids.contains(n));
        b.edge_ids.retain(|e| edge_ids.contains(e));
        if !b.node_ids.is_empty() || !b.edge_ids.is_empty() {
            out.branches.insert(id.clone(), b);
        }
    }
    out
}
