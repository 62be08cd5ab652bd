//! Closed vocabularies shared by every layer: node kinds, relation kinds,
//! roles, and the six-action edit vocabulary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

macro_rules! token_enum {
    (
        $(#[$meta:meta])*
        pub enum $name:ident { $($variant:ident => $token:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $token)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn token(self) -> &'static str {
                match self {
                    $($name::$variant => $token),+
                }
            }

            /// Position in declaration order.
            pub fn index(self) -> usize {
                Self::ALL.iter().position(|v| *v == self).expect("variant listed in ALL")
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.token())
            }
        }

        impl FromStr for $name {
            type Err = CoreError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($token => Ok($name::$variant),)+
                    other => Err(CoreError::UnknownToken {
                        vocabulary: stringify!($name),
                        token: other.to_string(),
                    }),
                }
            }
        }
    };
}

token_enum! {
    /// Node schema. Declaration order is also the embedding-table row order.
    pub enum NodeKind {
        Problem => "Problem",
        Hypothesis => "Hypothesis",
        Method => "Method",
        Assumption => "Assumption",
        Risk => "Risk",
        EvalPlan => "EvalPlan",
        NoveltyClaim => "NoveltyClaim",
        EvidenceNeed => "EvidenceNeed",
        Repair => "Repair",
    }
}

token_enum! {
    /// Relation schema. Declaration order is the relation index used by the critic.
    pub enum EdgeKind {
        Supports => "supports",
        Contradicts => "contradicts",
        DependsOn => "depends_on",
        OverlapsPrior => "overlaps_prior",
        Repairs => "repairs",
        Refines => "refines",
        RequiresEvidence => "requires_evidence",
    }
}

token_enum! {
    /// The five persistent roles. Declaration order is the canonical role order
    /// used by the merge.
    pub enum RoleId {
        MechanismProposer => "MechanismProposer",
        FeasibilityCritic => "FeasibilityCritic",
        NoveltyExaminer => "NoveltyExaminer",
        EvaluationDesigner => "EvaluationDesigner",
        ImpactReframer => "ImpactReframer",
    }
}

token_enum! {
    /// The edit vocabulary, in declaration order (candidate-kind embedding rows).
    pub enum ActionKind {
        AddSupportEdge => "add_support_edge",
        AttachEvidence => "attach_evidence",
        AddDependencyEdge => "add_dependency_edge",
        AddContradictionEdge => "add_contradiction_edge",
        ProposeRepair => "propose_repair",
        Skip => "skip",
    }
}

token_enum! {
    /// Which controller produced a decision.
    pub enum DecisionSource {
        Heuristic => "heuristic",
        Learned => "learned",
        Random => "random",
        Scripted => "scripted",
    }
}

token_enum! {
    pub enum Provenance {
        Agent => "agent",
        Init => "init",
        Repair => "repair",
    }
}

impl NodeKind {
    /// Id prefix for nodes of this kind.
    pub fn id_prefix(self) -> &'static str {
        match self {
            NodeKind::Problem => "prob",
            NodeKind::Hypothesis => "hyp",
            NodeKind::Method => "meth",
            NodeKind::Assumption => "asm",
            NodeKind::Risk => "risk",
            NodeKind::EvalPlan => "eval",
            NodeKind::NoveltyClaim => "nov",
            NodeKind::EvidenceNeed => "evn",
            NodeKind::Repair => "rep",
        }
    }

    /// Slot kinds of the problem-hypothesis-method-evaluation chain.
    pub const SLOTS: [NodeKind; 4] = [
        NodeKind::Problem,
        NodeKind::Hypothesis,
        NodeKind::Method,
        NodeKind::EvalPlan,
    ];

    pub fn is_slot(self) -> bool {
        Self::SLOTS.contains(&self)
    }

    /// Grounding-focus kinds: claims that should be supported and evidenced.
    pub fn is_focus(self) -> bool {
        matches!(
            self,
            NodeKind::Hypothesis | NodeKind::Method | NodeKind::NoveltyClaim | NodeKind::EvalPlan
        )
    }

    /// The slot a claim of this kind should attach to, in preference order.
    pub fn upstream(self) -> &'static [NodeKind] {
        match self {
            NodeKind::Hypothesis => &[NodeKind::Problem],
            NodeKind::Method => &[NodeKind::Hypothesis, NodeKind::Problem],
            NodeKind::EvalPlan => &[NodeKind::Method, NodeKind::Hypothesis, NodeKind::Problem],
            NodeKind::NoveltyClaim => &[NodeKind::Hypothesis, NodeKind::Problem],
            NodeKind::Risk | NodeKind::Assumption => &[NodeKind::Method, NodeKind::Hypothesis],
            _ => &[],
        }
    }
}

impl ActionKind {
    /// Fixed realization order used by the merge and by canonical slate order.
    pub const MERGE_ORDER: [ActionKind; 6] = [
        ActionKind::AddContradictionEdge,
        ActionKind::ProposeRepair,
        ActionKind::AddDependencyEdge,
        ActionKind::AddSupportEdge,
        ActionKind::AttachEvidence,
        ActionKind::Skip,
    ];

    pub fn merge_rank(self) -> usize {
        Self::MERGE_ORDER
            .iter()
            .position(|k| *k == self)
            .expect("every kind has a merge rank")
    }

    /// Edge kind created by an edge-adding action.
    pub fn edge_kind(self) -> Option<EdgeKind> {
        match self {
            ActionKind::AddSupportEdge => Some(EdgeKind::Supports),
            ActionKind::AddDependencyEdge => Some(EdgeKind::DependsOn),
            ActionKind::AddContradictionEdge => Some(EdgeKind::Contradicts),
            _ => None,
        }
    }

    /// Kinds legal in the structure-expansion round.
    pub fn allowed_in_round(self, round: u32) -> bool {
        if round <= 1 {
            matches!(
                self,
                ActionKind::AddSupportEdge
                    | ActionKind::AddDependencyEdge
                    | ActionKind::AddContradictionEdge
                    | ActionKind::Skip
            )
        } else {
            true
        }
    }
}

impl RoleId {
    pub fn canonical_rank(self) -> usize {
        self.index()
    }

    /// Short description of the role's specialty, used in prompts.
    pub fn specialty(self) -> &'static str {
        match self {
            RoleId::MechanismProposer => {
                "You develop the core mechanism: hypotheses and methods, and the support links between them."
            }
            RoleId::FeasibilityCritic => {
                "You examine feasibility: risks, assumptions, and unresolved conflicts that threaten execution."
            }
            RoleId::NoveltyExaminer => {
                "You examine novelty: novelty claims, overlap with prior work, and contradictions between claims."
            }
            RoleId::EvaluationDesigner => {
                "You design the evaluation: evaluation plans and the dependency links that make them testable."
            }
            RoleId::ImpactReframer => {
                "You sharpen the problem framing and its significance, and connect claims back to the problem."
            }
        }
    }
}

/// Which of the three controller deficits a signal state is dominated by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeficitKind {
    Grounding,
    Contradiction,
    Completeness,
}

impl ActionKind {
    /// The deficit an action primarily targets; `None` for skip.
    pub fn targeted_deficit(self) -> Option<DeficitKind> {
        match self {
            ActionKind::AddSupportEdge | ActionKind::AttachEvidence => Some(DeficitKind::Grounding),
            ActionKind::AddDependencyEdge => Some(DeficitKind::Completeness),
            ActionKind::AddContradictionEdge | ActionKind::ProposeRepair => {
                Some(DeficitKind::Contradiction)
            }
            ActionKind::Skip => None,
        }
    }
}
