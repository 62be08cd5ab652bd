//! Typed trace records. Within an episode records are ordered by round, then by
//! the declaration order of [`RecordBody`].

use serde::{Deserialize, Serialize};
use serde_json::Value;

use eig_core::patch::Patch;
use eig_core::slates::{Candidate, Slate};
use eig_core::{ActionKind, DecisionSource, InputPacket, RoleId, SignalVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub packet: InputPacket,
    pub seed: u64,
    pub controller: String,
    pub t_max: u32,
    pub sequential: bool,
    /// The full run configuration as it was applied.
    pub config: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundStart {
    pub snapshot_hash: String,
    /// Canonical serialization of the frozen snapshot.
    pub snapshot: String,
    pub active_roles: Vec<RoleId>,
    pub signals: SignalVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlateRecord {
    pub role: RoleId,
    pub slate: Slate,
    pub slate_hash: String,
    pub agent_suggestions: usize,
    /// Agent reply lines rejected by the grammar.
    pub dropped_lines: usize,
    /// Parsed suggestions rejected by slate validation.
    pub dropped_invalid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub role: RoleId,
    pub slate_hash: String,
    pub candidate_index: usize,
    pub candidate: Candidate,
    pub source: DecisionSource,
    /// Teacher score of every slate candidate, whatever the controller.
    pub teacher_scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learned_scores: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrated_scores: Option<Vec<f64>>,
}

impl DecisionRecord {
    pub fn kind(&self) -> ActionKind {
        self.candidate.kind
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub role: RoleId,
    pub patch: Patch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub graph_hash: String,
    pub graph: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalsRecord {
    pub signals: SignalVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommitEval {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrated_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Heuristic commit rule on the post-round graph; also the weak commit label.
    pub teacher_label: bool,
    pub committed: bool,
    /// Committed only because the round budget ran out.
    pub forced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub graph_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRecord {
    pub backbone_hash: String,
    pub proposal: Value,
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardRecord {
    pub guard: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<RoleId>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record_type", content = "payload", rename_all = "snake_case")]
pub enum RecordBody {
    EpisodeMeta(EpisodeMeta),
    RoundStart(RoundStart),
    Slate(SlateRecord),
    Decision(DecisionRecord),
    Patch(PatchRecord),
    Merge(MergeRecord),
    Signals(SignalsRecord),
    CommitEval(CommitEval),
    Commit(CommitRecord),
    Synthesis(SynthesisRecord),
    Guard(GuardRecord),
}

impl RecordBody {
    /// Position in the within-round record order.
    pub fn rank(&self) -> usize {
        match self {
            RecordBody::EpisodeMeta(_) => 0,
            RecordBody::RoundStart(_) => 1,
            RecordBody::Slate(_) => 2,
            RecordBody::Decision(_) => 3,
            RecordBody::Patch(_) => 4,
            RecordBody::Merge(_) => 5,
            RecordBody::Signals(_) => 6,
            RecordBody::CommitEval(_) => 7,
            RecordBody::Commit(_) => 8,
            RecordBody::Synthesis(_) => 9,
            RecordBody::Guard(_) => 10,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            RecordBody::EpisodeMeta(_) => "episode_meta",
            RecordBody::RoundStart(_) => "round_start",
            RecordBody::Slate(_) => "slate",
            RecordBody::Decision(_) => "decision",
            RecordBody::Patch(_) => "patch",
            RecordBody::Merge(_) => "merge",
            RecordBody::Signals(_) => "signals",
            RecordBody::CommitEval(_) => "commit_eval",
            RecordBody::Commit(_) => "commit",
            RecordBody::Synthesis(_) => "synthesis",
            RecordBody::Guard(_) => "guard",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub episode_id: String,
    pub group_id: String,
    pub round: u32,
    #[serde(flatten)]
    pub body: RecordBody,
}
