//! The four bounded controller signals and their seven counting components.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::graph::IdeaGraph;
use crate::kinds::{DeficitKind, EdgeKind, NodeKind};

pub const GROUNDING_SUPPORT_WEIGHT: f64 = 0.5;
pub const GROUNDING_EVIDENCE_WEIGHT: f64 = 0.5;
pub const LOAD_EDGE_WEIGHT: f64 = 0.65;
pub const LOAD_OPEN_WEIGHT: f64 = 0.35;
pub const COMPLETENESS_SLOT_WEIGHT: f64 = 0.25;
pub const COMPLETENESS_DEP_WEIGHT: f64 = 0.45;
pub const COMPLETENESS_CONN_WEIGHT: f64 = 0.30;
pub const MATURITY_GROUNDING_WEIGHT: f64 = 0.40;
pub const MATURITY_COMPLETENESS_WEIGHT: f64 = 0.35;
pub const MATURITY_RESOLUTION_WEIGHT: f64 = 0.25;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalComponents {
    pub s_sup: f64,
    pub s_evi: f64,
    pub l_edge: f64,
    pub l_open: f64,
    pub q_slot: f64,
    pub q_dep: f64,
    pub q_conn: f64,
}

impl SignalComponents {
    pub fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("s_sup", self.s_sup),
            ("s_evi", self.s_evi),
            ("l_edge", self.l_edge),
            ("l_open", self.l_open),
            ("q_slot", self.q_slot),
            ("q_dep", self.q_dep),
            ("q_conn", self.q_conn),
        ]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalVector {
    pub grounding: f64,
    pub contradiction_load: f64,
    pub completeness: f64,
    pub maturity: f64,
    pub components: SignalComponents,
}

impl SignalVector {
    /// All eleven values rendered with 12 fixed decimals, for trace records.
    pub fn fixed_decimal_map(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> = self
            .components
            .named()
            .iter()
            .map(|(k, v)| (k.to_string(), format!("{v:.12}")))
            .collect();
        out.insert("grounding".into(), format!("{:.12}", self.grounding));
        out.insert("contradiction_load".into(), format!("{:.12}", self.contradiction_load));
        out.insert("completeness".into(), format!("{:.12}", self.completeness));
        out.insert("maturity".into(), format!("{:.12}", self.maturity));
        out
    }

    /// Parses the fixed-decimal rendering back.
    pub fn from_fixed_decimal_map(map: &BTreeMap<String, String>) -> Option<Self> {
        let get = |k: &str| map.get(k)?.parse::<f64>().ok();
        Some(SignalVector {
            grounding: get("grounding")?,
            contradiction_load: get("contradiction_load")?,
            completeness: get("completeness")?,
            maturity: get("maturity")?,
            components: SignalComponents {
                s_sup: get("s_sup")?,
                s_evi: get("s_evi")?,
                l_edge: get("l_edge")?,
                l_open: get("l_open")?,
                q_slot: get("q_slot")?,
                q_dep: get("q_dep")?,
                q_conn: get("q_conn")?,
            },
        })
    }

    pub fn deficit(&self, kind: DeficitKind) -> f64 {
        match kind {
            DeficitKind::Grounding => 1.0 - self.grounding,
            DeficitKind::Contradiction => self.contradiction_load,
            DeficitKind::Completeness => 1.0 - self.completeness,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn find(parent: &mut BTreeMap<String, String>, x: &str) -> String {
    let mut root = x.to_string();
    while parent[&root] != root {
        root = parent[&root].clone();
    }
    let mut cur = x.to_string();
    while parent[&cur] != root {
        let next = parent[&cur].clone();
        parent.insert(cur, root.clone());
        cur = next;
    }
    root
}

pub fn compute_components(graph: &IdeaGraph) -> SignalComponents {
    let focus: Vec<&str> = graph
        .active_nodes()
        .filter(|n| n.kind.is_focus())
        .map(|n| n.id.as_str())
        .collect();
    let live: Vec<_> = graph.live_edges().collect();

    let supported: BTreeSet<&str> = live
        .iter()
        .filter(|e| e.kind == EdgeKind::Supports)
        .flat_map(|e| [e.src.as_str(), e.dst.as_str()])
        .collect();
    let s_sup = ratio(focus.iter().filter(|id| supported.contains(*id)).count(), focus.len());
    let s_evi = ratio(
        focus.iter().filter(|id| !graph.nodes[**id].evidence.is_empty()).count(),
        focus.len(),
    );

    let contradictions: Vec<_> = live.iter().filter(|e| e.kind == EdgeKind::Contradicts).collect();
    let l_edge = ratio(
        contradictions.iter().filter(|e| !e.resolved).count(),
        contradictions.len(),
    );
    let targets: BTreeSet<&str> = contradictions.iter().map(|e| e.dst.as_str()).collect();
    let repaired: BTreeSet<&str> = live
        .iter()
        .filter(|e| e.kind == EdgeKind::Repairs)
        .map(|e| e.dst.as_str())
        .collect();
    let l_open = ratio(
        targets.iter().filter(|t| !repaired.contains(*t)).count(),
        targets.len(),
    );

    let backbone: BTreeMap<&str, NodeKind> = graph
        .active_nodes()
        .filter(|n| n.kind.is_slot())
        .map(|n| (n.id.as_str(), n.kind))
        .collect();
    let present: BTreeSet<NodeKind> = backbone.values().copied().collect();
    let q_slot = present.len() as f64 / NodeKind::SLOTS.len() as f64;

    let chain_edges: Vec<_> = live
        .iter()
        .filter(|e| {
            matches!(e.kind, EdgeKind::Supports | EdgeKind::DependsOn)
                && backbone.contains_key(e.src.as_str())
                && backbone.contains_key(e.dst.as_str())
        })
        .collect();
    let dependents: Vec<&str> = backbone
        .iter()
        .filter(|(_, k)| matches!(k, NodeKind::Hypothesis | NodeKind::Method | NodeKind::EvalPlan))
        .map(|(id, _)| *id)
        .collect();
    let linked: BTreeSet<&str> = chain_edges.iter().map(|e| e.src.as_str()).collect();
    let q_dep = ratio(
        dependents.iter().filter(|id| linked.contains(*id)).count(),
        dependents.len(),
    );

    let q_conn = if backbone.is_empty() {
        0.0
    } else {
        let mut parent: BTreeMap<String, String> =
            backbone.keys().map(|k| (k.to_string(), k.to_string())).collect();
        for e in &chain_edges {
            let (a, b) = (find(&mut parent, &e.src), find(&mut parent, &e.dst));
            if a != b {
                parent.insert(a, b);
            }
        }
        let mut components: BTreeMap<String, (usize, BTreeSet<NodeKind>)> = BTreeMap::new();
        for (id, kind) in &backbone {
            let root = find(&mut parent, id);
            let entry = components.entry(root).or_default();
            entry.0 += 1;
            entry.1.insert(*kind);
        }
        if components.values().any(|(_, kinds)| *kinds == present) {
            1.0
        } else {
            let largest = components.values().map(|(n, _)| *n).max().unwrap_or(0);
            ratio(largest, backbone.len())
        }
    };

    SignalComponents {
        s_sup,
        s_evi,
        l_edge,
        l_open,
        q_slot,
        q_dep,
        q_conn,
    }
}

pub fn compute_signals(components: &SignalComponents) -> Result<SignalVector> {
    for (name, value) in components.named() {
        if !(0.0..=1.0).contains(&value) {
            return Err(CoreError::SignalOutOfRange { name, value });
        }
    }
    let c = components;
    let grounding = GROUNDING_SUPPORT_WEIGHT * c.s_sup + GROUNDING_EVIDENCE_WEIGHT * c.s_evi;
    let contradiction_load = LOAD_EDGE_WEIGHT * c.l_edge + LOAD_OPEN_WEIGHT * c.l_open;
    let completeness = COMPLETENESS_SLOT_WEIGHT * c.q_slot
        + COMPLETENESS_DEP_WEIGHT * c.q_dep
        + COMPLETENESS_CONN_WEIGHT * c.q_conn;
    let maturity = MATURITY_GROUNDING_WEIGHT * grounding
        + MATURITY_COMPLETENESS_WEIGHT * completeness
        + MATURITY_RESOLUTION_WEIGHT * (1.0 - contradiction_load);
    Ok(SignalVector {
        grounding,
        contradiction_load,
        completeness,
        maturity,
        components: *c,
    })
}

/// Components and signals of a graph in one call.
pub fn graph_signals(graph: &IdeaGraph) -> SignalVector {
    compute_signals(&compute_components(graph)).expect("counted components lie in [0, 1]")
}

/// Largest of the three deficits; ties prefer contradiction, then grounding.
pub fn dominant_deficit(signals: &SignalVector) -> DeficitKind {
    let mut best = DeficitKind::Contradiction;
    for kind in [DeficitKind::Grounding, DeficitKind::Completeness] {
        if signals.deficit(kind) > signals.deficit(best) {
            best = kind;
        }
    }
    best
}
