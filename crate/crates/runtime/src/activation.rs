//! Deficit-driven role activation.

use std::collections::BTreeSet;

use eig_core::{graph_signals, EdgeKind, IdeaGraph, NodeKind, RoleId};
use serde::{Deserialize, Serialize};

/// Grounding below this re-activates the grounding roles.
pub const WEAK_GROUNDING: f64 = 0.6;

/// Which deficits wake which roles from round 2 on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivationMap {
    pub missing_slot: Vec<RoleId>,
    pub weak_grounding: Vec<RoleId>,
    pub incomplete_dependencies: Vec<RoleId>,
    pub unresolved_contradictions: Vec<RoleId>,
    pub open_feasibility: Vec<RoleId>,
    pub weak_grounding_below: f64,
}

impl Default for ActivationMap {
    fn default() -> Self {
        use RoleId::*;
        ActivationMap {
            missing_slot: vec![MechanismProposer, ImpactReframer],
            weak_grounding: vec![MechanismProposer, NoveltyExaminer],
            incomplete_dependencies: vec![EvaluationDesigner],
            unresolved_contradictions: vec![NoveltyExaminer, FeasibilityCritic],
            open_feasibility: vec![FeasibilityCritic],
            weak_grounding_below: WEAK_GROUNDING,
        }
    }
}

/// An active Risk or Assumption that nothing supports or repairs yet.
pub fn has_open_feasibility_work(graph: &IdeaGraph) -> bool {
    graph
        .active_nodes()
        .filter(|n| matches!(n.kind, NodeKind::Risk | NodeKind::Assumption))
        .any(|n| {
            !graph.live_edges().any(|e| {
                (e.kind == EdgeKind::Supports && (e.src == n.id || e.dst == n.id))
                    || (e.kind == EdgeKind::Repairs && e.dst == n.id)
            })
        })
}

pub fn activate_roles(graph: &IdeaGraph, round: u32) -> BTreeSet<RoleId> {
    activate_roles_with(&ActivationMap::default(), graph, round)
}

pub fn activate_roles_with(map: &ActivationMap, graph: &IdeaGraph, round: u32) -> BTreeSet<RoleId> {
    let all: BTreeSet<RoleId> = RoleId::ALL.iter().copied().collect();
    if round <= 1 {
        return all;
    }
    let s = graph_signals(graph);
    let mut active = BTreeSet::new();
    let mut wake = |on: bool, roles: &[RoleId]| {
        if on {
            active.extend(roles.iter().copied());
        }
    };
    wake(s.components.q_slot < 1.0, &map.missing_slot);
    wake(s.grounding < map.weak_grounding_below, &map.weak_grounding);
    wake(s.components.q_dep < 1.0, &map.incomplete_dependencies);
    wake(s.contradiction_load > 0.0, &map.unresolved_contradictions);
    wake(has_open_feasibility_work(graph), &map.open_feasibility);
    if active.is_empty() {
        all
    } else {
        active
    }
}
