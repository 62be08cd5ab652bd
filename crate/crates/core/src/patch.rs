//! Realizing a selected decision as a graph delta against a frozen snapshot.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::graph::{ActionPayload, Evidence, GraphAction};
use crate::kinds::{ActionKind, DecisionSource, EdgeKind, NodeKind, Provenance, RoleId};
use crate::snapshot::Snapshot;

/// Reference to an edge endpoint: an existing node or a node added by the same patch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRef {
    Existing(String),
    Added(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "snake_case")]
pub enum Addition {
    Node {
        kind: NodeKind,
        text: String,
        confidence: f64,
        provenance: Provenance,
    },
    Edge {
        src: NodeRef,
        dst: NodeRef,
        kind: EdgeKind,
        evidence_ref: Option<String>,
        note: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", content = "value", rename_all = "snake_case")]
pub enum FieldChange {
    /// Appends one entry to a node's evidence list.
    Evidence(Evidence),
    /// Sets an edge's resolution flag.
    Resolved(bool),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mutation {
    pub target: String,
    pub change: FieldChange,
}

/// A role-local graph delta. Ids are not assigned until merge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub role: RoleId,
    pub kind: ActionKind,
    pub round: u32,
    pub targets: Vec<String>,
    pub payload: ActionPayload,
    pub source: DecisionSource,
    pub rationale: String,
    pub additions: Vec<Addition>,
    pub mutations: Vec<Mutation>,
    pub empty: bool,
}

impl Patch {
    fn from_action(action: &GraphAction) -> Self {
        Patch {
            role: action.role,
            kind: action.kind,
            round: action.round,
            targets: action.targets.clone(),
            payload: action.payload.clone(),
            source: action.source,
            rationale: action.rationale.clone(),
            additions: Vec::new(),
            mutations: Vec::new(),
            empty: true,
        }
    }

    /// Every existing id the patch reads or writes.
    pub fn referenced_ids(&self) -> Vec<&str> {
        let mut ids = Vec::new();
        for add in &self.additions {
            if let Addition::Edge { src, dst, .. } = add {
                for end in [src, dst] {
                    if let NodeRef::Existing(id) = end {
                        ids.push(id.as_str());
                    }
                }
            }
        }
        ids.extend(self.mutations.iter().map(|m| m.target.as_str()));
        ids
    }

    /// The record as it enters the action log once merged.
    pub fn action(&self) -> GraphAction {
        GraphAction {
            round: self.round,
            role: self.role,
            kind: self.kind,
            targets: self.targets.clone(),
            payload: self.payload.clone(),
            rationale: self.rationale.clone(),
            source: self.source,
            timestamp: 0,
        }
    }
}

/// Default confidence for nodes created by edits.
pub const EDIT_NODE_CONFIDENCE: f64 = 0.5;

pub fn materialize_decision(snapshot: &Snapshot, decision: &GraphAction) -> Result<Patch> {
    let graph = snapshot.graph();
    let kind = decision.kind;
    let mut patch = Patch::from_action(decision);

    let malformed = |reason: &str| CoreError::MalformedDecision {
        kind,
        reason: reason.to_string(),
    };
    let active_node = |id: &String| -> Result<()> {
        if graph.is_active_node(id) {
            Ok(())
        } else {
            Err(CoreError::MissingTarget {
                kind,
                id: id.clone(),
            })
        }
    };

    match kind {
        ActionKind::Skip => {
            if !decision.targets.is_empty() {
                return Err(malformed("skip carries targets"));
            }
            return Ok(patch);
        }
        ActionKind::AddSupportEdge | ActionKind::AddDependencyEdge | ActionKind::AddContradictionEdge => {
            let [src, dst] = decision.targets.as_slice() else {
                return Err(malformed("edge actions need exactly two node targets"));
            };
            if src == dst {
                return Err(malformed("edge endpoints coincide"));
            }
            active_node(src)?;
            active_node(dst)?;
            let edge_kind = kind.edge_kind().expect("edge-adding kind");
            if graph.has_active_edge(src, dst, edge_kind) {
                return Err(malformed("identical active edge already exists"));
            }
            patch.additions.push(Addition::Edge {
                src: NodeRef::Existing(src.clone()),
                dst: NodeRef::Existing(dst.clone()),
                kind: edge_kind,
                evidence_ref: None,
                note: decision.payload.note.clone(),
            });
        }
        ActionKind::AttachEvidence => {
            let [target] = decision.targets.as_slice() else {
                return Err(malformed("attach_evidence needs exactly one node target"));
            };
            active_node(target)?;
            let evidence = decision
                .payload
                .evidence
                .clone()
                .ok_or_else(|| malformed("attach_evidence without an evidence entry"))?;
            patch.mutations.push(Mutation {
                target: target.clone(),
                change: FieldChange::Evidence(evidence),
            });
        }
        ActionKind::ProposeRepair => {
            let [target] = decision.targets.as_slice() else {
                return Err(malformed("propose_repair needs exactly one edge target"));
            };
            let edge = graph
                .edge(target)
                .filter(|e| e.active)
                .ok_or_else(|| CoreError::MissingTarget {
                    kind,
                    id: target.clone(),
                })?;
            if edge.kind != EdgeKind::Contradicts {
                return Err(malformed("repair target is not a contradiction edge"));
            }
            if edge.resolved {
                return Err(malformed("contradiction is already resolved"));
            }
            active_node(&edge.dst)?;
            let text = decision
                .payload
                .text
                .clone()
                .unwrap_or_else(|| format!("Repair of contradiction {}", edge.id));
            patch.additions.push(Addition::Node {
                kind: NodeKind::Repair,
                text,
                confidence: EDIT_NODE_CONFIDENCE,
                provenance: Provenance::Repair,
            });
            patch.additions.push(Addition::Edge {
                src: NodeRef::Added(0),
                dst: NodeRef::Existing(edge.dst.clone()),
                kind: EdgeKind::Repairs,
                evidence_ref: None,
                note: Some(format!("repairs {}", edge.id)),
            });
            patch.mutations.push(Mutation {
                target: edge.id.clone(),
                change: FieldChange::Resolved(true),
            });
        }
    }
    patch.empty = patch.additions.is_empty() && patch.mutations.is_empty();
    Ok(patch)
}
