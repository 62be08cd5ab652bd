//! The persistent typed idea graph and its element records.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::kinds::{ActionKind, DecisionSource, EdgeKind, NodeKind, Provenance, RoleId};

pub type NodeId = String;
pub type EdgeId = String;
pub type BranchId = String;

/// Branch holding packet-derived initialization content.
pub const INIT_BRANCH: &str = "init";

/// Branch id owned by a role.
pub fn role_branch(role: RoleId) -> BranchId {
    format!("branch-{}", role.token())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Evidence {
    pub source: String,
    pub snippet: String,
}

/// Structured fields carried by an action besides its kind and targets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ActionPayload {
    pub fn is_empty(&self) -> bool {
        self.text.is_none() && self.evidence.is_none() && self.note.is_none()
    }

    pub fn with_text(text: impl Into<String>) -> Self {
        Self {
            text: Some(text.into()),
            ..Self::default()
        }
    }

    pub fn with_evidence(evidence: Evidence) -> Self {
        Self {
            evidence: Some(evidence),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub text: String,
    /// Generating role; `None` for packet-initialized nodes.
    pub role: Option<RoleId>,
    pub branch: BranchId,
    pub confidence: f64,
    pub evidence: Vec<Evidence>,
    pub active: bool,
    pub timestamp: u64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
    pub role: Option<RoleId>,
    pub branch: BranchId,
    pub evidence_ref: Option<String>,
    pub note: Option<String>,
    pub resolved: bool,
    pub active: bool,
    pub timestamp: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: BranchId,
    pub node_ids: BTreeSet<NodeId>,
    pub edge_ids: BTreeSet<EdgeId>,
    pub frozen: bool,
    pub rejected: bool,
    pub notes: String,
}

/// One replayable role decision as realized by a merge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphAction {
    pub round: u32,
    pub role: RoleId,
    pub kind: ActionKind,
    pub targets: Vec<String>,
    pub payload: ActionPayload,
    pub rationale: String,
    pub source: DecisionSource,
    pub timestamp: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdeaGraph {
    pub nodes: BTreeMap<NodeId, Node>,
    pub edges: BTreeMap<EdgeId, Edge>,
    pub branches: BTreeMap<BranchId, Branch>,
    pub action_log: Vec<GraphAction>,
    pub group_id: String,
    pub round: u32,
    /// Episode-local logical clock; the next timestamp to hand out.
    pub clock: u64,
}

impl IdeaGraph {
    pub fn new(group_id: impl Into<String>) -> Self {
        Self {
            group_id: group_id.into(),
            ..Self::default()
        }
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn is_active_node(&self, id: &str) -> bool {
        self.nodes.get(id).is_some_and(|n| n.active)
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(|n| n.active)
    }

    /// Active edges whose endpoints are both active.
    pub fn live_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges
            .values()
            .filter(|e| e.active && self.is_active_node(&e.src) && self.is_active_node(&e.dst))
    }

    pub fn has_active_edge(&self, src: &str, dst: &str, kind: EdgeKind) -> bool {
        self.edges
            .values()
            .any(|e| e.active && e.kind == kind && e.src == src && e.dst == dst)
    }

    /// True when an active contradiction links the pair in either direction.
    pub fn has_contradiction_between(&self, a: &str, b: &str) -> bool {
        self.edges.values().any(|e| {
            e.active
                && e.kind == EdgeKind::Contradicts
                && ((e.src == a && e.dst == b) || (e.src == b && e.dst == a))
        })
    }

    fn tick(&mut self) -> u64 {
        let t = self.clock;
        self.clock += 1;
        t
    }

    /// Inserts a node, assigning its id and timestamp from the logical clock.
    pub fn insert_node(&mut self, draft: NodeInsert) -> NodeId {
        let t = self.tick();
        let id = format!("{}-{:04}", draft.kind.id_prefix(), t);
        let node = Node {
            id: id.clone(),
            kind: draft.kind,
            text: draft.text,
            role: draft.role,
            branch: draft.branch.clone(),
            confidence: draft.confidence.clamp(0.0, 1.0),
            evidence: draft.evidence,
            active: true,
            timestamp: t,
            provenance: draft.provenance,
        };
        self.nodes.insert(id.clone(), node);
        self.branch_mut(&draft.branch).node_ids.insert(id.clone());
        id
    }

    /// Inserts an edge between existing nodes. Returns `None` if an identical
    /// active edge already exists.
    pub fn insert_edge(&mut self, draft: EdgeInsert) -> Result<Option<EdgeId>> {
        if draft.src == draft.dst {
            return Err(CoreError::Integrity(format!("self-loop on {}", draft.src)));
        }
        for end in [&draft.src, &draft.dst] {
            if !self.nodes.contains_key(end) {
                return Err(CoreError::Integrity(format!("edge endpoint {end} does not exist")));
            }
        }
        if self.has_active_edge(&draft.src, &draft.dst, draft.kind) {
            return Ok(None);
        }
        let t = self.tick();
        let id = format!("e-{t:04}");
        let edge = Edge {
            id: id.clone(),
            src: draft.src,
            dst: draft.dst,
            kind: draft.kind,
            role: draft.role,
            branch: draft.branch.clone(),
            evidence_ref: draft.evidence_ref,
            note: draft.note,
            resolved: false,
            active: true,
            timestamp: t,
        };
        self.edges.insert(id.clone(), edge);
        self.branch_mut(&draft.branch).edge_ids.insert(id.clone());
        Ok(Some(id))
    }

    pub(crate) fn log_action(&mut self, mut action: GraphAction) {
        action.timestamp = self.tick();
        self.action_log.push(action);
    }

    fn branch_mut(&mut self, id: &str) -> &mut Branch {
        self.branches.entry(id.to_string()).or_insert_with(|| Branch {
            id: id.to_string(),
            ..Branch::default()
        })
    }

    /// Marks a branch rejected and deactivates its members.
    pub fn reject_branch(&mut self, id: &str) {
        let Some(branch) = self.branches.get_mut(id) else {
            return;
        };
        branch.rejected = true;
        let (nodes, edges) = (branch.node_ids.clone(), branch.edge_ids.clone());
        for n in nodes {
            if let Some(node) = self.nodes.get_mut(&n) {
                node.active = false;
            }
        }
        for e in edges {
            if let Some(edge) = self.edges.get_mut(&e) {
                edge.active = false;
            }
        }
    }

    /// Checks every structural invariant of the graph.
    pub fn check_integrity(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (id, node) in &self.nodes {
            if id != &node.id {
                return Err(CoreError::Integrity(format!("node key {id} != id {}", node.id)));
            }
            if !(0.0..=1.0).contains(&node.confidence) {
                return Err(CoreError::Integrity(format!("node {id} confidence out of range")));
            }
        }
        for (id, edge) in &self.edges {
            if id != &edge.id {
                return Err(CoreError::Integrity(format!("edge key {id} != id {}", edge.id)));
            }
            if !self.nodes.contains_key(&edge.src) || !self.nodes.contains_key(&edge.dst) {
                return Err(CoreError::Integrity(format!("edge {id} has a dangling endpoint")));
            }
            if edge.src == edge.dst {
                return Err(CoreError::Integrity(format!("edge {id} is a self-loop")));
            }
            if edge.resolved && edge.kind != EdgeKind::Contradicts {
                return Err(CoreError::Integrity(format!(
                    "edge {id} is resolved but not a contradiction"
                )));
            }
            if edge.active && !seen.insert((edge.src.as_str(), edge.dst.as_str(), edge.kind)) {
                return Err(CoreError::Integrity(format!(
                    "duplicate active edge ({}, {}, {})",
                    edge.src, edge.dst, edge.kind
                )));
            }
        }
        for (id, branch) in &self.branches {
            for n in &branch.node_ids {
                let node = self
                    .nodes
                    .get(n)
                    .ok_or_else(|| CoreError::Integrity(format!("branch {id} lists missing node {n}")))?;
                if branch.rejected && node.active {
                    return Err(CoreError::Integrity(format!("rejected branch {id} has active node {n}")));
                }
            }
            for e in &branch.edge_ids {
                let edge = self
                    .edges
                    .get(e)
                    .ok_or_else(|| CoreError::Integrity(format!("branch {id} lists missing edge {e}")))?;
                if branch.rejected && edge.active {
                    return Err(CoreError::Integrity(format!("rejected branch {id} has active edge {e}")));
                }
            }
        }
        Ok(())
    }
}

/// Content of a node about to be inserted; id and timestamp come from the graph.
#[derive(Clone, Debug)]
pub struct NodeInsert {
    pub kind: NodeKind,
    pub text: String,
    pub role: Option<RoleId>,
    pub branch: BranchId,
    pub confidence: f64,
    pub evidence: Vec<Evidence>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct EdgeInsert {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
    pub role: Option<RoleId>,
    pub branch: BranchId,
    pub evidence_ref: Option<String>,
    pub note: Option<String>,
}
