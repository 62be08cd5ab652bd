//! Typed idea graph, controller signals, slates, and heuristic control.

pub mod backbone;
pub mod canonical;
pub mod control;
pub mod error;
pub mod graph;
pub mod kinds;
pub mod merge;
pub mod packet;
pub mod patch;
pub mod signals;
pub mod slates;
pub mod snapshot;

pub use backbone::extract_backbone;
pub use error::{CoreError, Result};
pub use graph::{
    role_branch, ActionPayload, Branch, BranchId, Edge, EdgeId, EdgeInsert, Evidence, GraphAction, IdeaGraph,
    Node, NodeId, NodeInsert, INIT_BRANCH,
};
pub use kinds::{ActionKind, DecisionSource, DeficitKind, EdgeKind, NodeKind, Provenance, RoleId};
pub use merge::merge_patches;
pub use packet::{init_graph, InputPacket, Reference};
pub use patch::{materialize_decision, Patch};
pub use signals::{compute_components, compute_signals, dominant_deficit, graph_signals, SignalComponents, SignalVector};
pub use slates::{build_slate, generate_candidates, validate_slate, Candidate, CandidateOrigin, Slate};
pub use snapshot::{freeze_snapshot, Snapshot};
