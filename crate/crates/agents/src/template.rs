//! Offline default agent: packet-derived branch seeds and no extra suggestions.

use eig_core::{InputPacket, NodeKind, RoleId};

use crate::agent::{Agent, Proposals};
use crate::grammar::NodeDraft;
use crate::request::AgentRequest;

#[derive(Clone, Copy, Debug, Default)]
pub struct TemplateAgent;

fn focus(packet: &InputPacket) -> String {
    let topic = packet.topic.trim();
    if topic.is_empty() {
        packet.keywords.join(", ")
    } else {
        topic.to_string()
    }
}

fn lever(packet: &InputPacket) -> String {
    packet
        .keywords
        .first()
        .cloned()
        .or_else(|| packet.references.first().map(|r| r.title.clone()))
        .unwrap_or_else(|| "a targeted mechanism".into())
}

impl Agent for TemplateAgent {
    fn propose(&self, _request: &AgentRequest) -> Proposals {
        Proposals::default()
    }

    fn seed(&self, role: RoleId, packet: &InputPacket) -> Vec<NodeDraft> {
        let (f, l) = (focus(packet), lever(packet));
        let draft = |kind, text: String| NodeDraft { kind, text };
        match role {
            RoleId::MechanismProposer => vec![
                draft(NodeKind::Hypothesis, format!("Applying {l} to {f} improves on current practice")),
                draft(NodeKind::Method, format!("Build a {l} pipeline for {f} and ablate each component")),
            ],
            RoleId::FeasibilityCritic => vec![draft(
                NodeKind::Risk,
                format!("The {l} pipeline may not scale to realistic {f} workloads"),
            )],
            RoleId::NoveltyExaminer => vec![draft(
                NodeKind::NoveltyClaim,
                format!("No prior work combines {l} with {f} in this way"),
            )],
            RoleId::EvaluationDesigner => vec![draft(
                NodeKind::EvalPlan,
                format!("Compare against strong {f} baselines on held-out benchmarks"),
            )],
            RoleId::ImpactReframer => Vec::new(),
        }
    }
}
