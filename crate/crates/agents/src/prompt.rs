use serde::{Deserialize, Serialize};

use eig_core::{InputPacket, NodeKind, RoleId};

use crate::request::{AgentRequest, Phase};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }
}

fn duties(role: RoleId) -> &'static str {
    match role {
        RoleId::MechanismProposer => "Link hypotheses and methods to what they support and ground them in evidence.",
        RoleId::FeasibilityCritic => {
            "Flag risks and assumptions that conflict with the plan and propose repairs for open conflicts."
        }
        RoleId::NoveltyExaminer => {
            "Check novelty claims against prior work and raise contradictions between claims that cannot both hold."
        }
        RoleId::EvaluationDesigner => "Make evaluation plans depend on the methods and hypotheses they test.",
        RoleId::ImpactReframer => "Connect claims back to the problem statement and strengthen its support.",
    }
}

fn phase_note(phase: Phase) -> &'static str {
    match phase {
        Phase::Structure => "This is the structure round: only relation edits are legal.",
        Phase::Repair => "This is a grounding and repair round: evidence and repairs are legal.",
    }
}

/// System and user messages asking one role for edits on the frozen snapshot.
pub fn build_role_prompt(role: RoleId, request: &AgentRequest) -> Vec<ChatMessage> {
    let kinds: Vec<&str> = request.phase.vocabulary().iter().map(|k| k.token()).collect();
    let system = format!(
        "You are the {role} in a team refining a research idea graph.\n{}\n{}\n{}\n\
         Legal actions this round: {}.",
        role.specialty(),
        duties(role),
        phase_note(request.phase),
        kinds.join(", ")
    );
    let mut user = format!("Group: {}\nRound: {}\nTopic: {}\n", request.group_id, request.round, request.topic);
    if !request.keywords.is_empty() {
        user.push_str(&format!("Keywords: {}\n", request.keywords.join(", ")));
    }
    user.push_str("\nCurrent graph (one JSON record per line):\n");
    user.push_str(&request.snapshot);
    user.push_str(
        "\nReply with one action per line in the form\n\
         KIND | target_ids | payload\n\
         Separate target ids with commas. For attach_evidence the payload is `source :: snippet`; \
         for propose_repair it is the repair statement; for edges it is an optional note. \
         Target a contradicts edge id when proposing a repair. Write `skip` if nothing helps.\n",
    );
    vec![ChatMessage::system(system), ChatMessage::user(user)]
}

/// Messages asking a role for the initial nodes of its branch.
pub fn build_seed_prompt(role: RoleId, packet: &InputPacket) -> Vec<ChatMessage> {
    let kinds: Vec<&str> = NodeKind::ALL
        .iter()
        .filter(|k| **k != NodeKind::Repair)
        .map(|k| k.token())
        .collect();
    let system = format!(
        "You are the {role} starting a research idea graph.\n{}\nPropose at most three short nodes for your branch.",
        role.specialty()
    );
    let mut user = format!("Topic: {}\n", packet.topic);
    for r in &packet.references {
        user.push_str(&format!("Reference: {} :: {}\n", r.title, r.snippet));
    }
    user.push_str(&format!(
        "Reply with one node per line in the form `Kind | text` where Kind is one of {}.\n",
        kinds.join(", ")
    ));
    vec![ChatMessage::system(system), ChatMessage::user(user)]
}

/// Messages asking for a structured proposal from the committed backbone.
pub fn build_synthesis_prompt(packet: &InputPacket, backbone: &str) -> Vec<ChatMessage> {
    vec![
        ChatMessage::system(
            "You write the final research proposal from a committed idea graph. \
             Use only its content. Answer with exactly five sections headed \
             `Title:`, `Problem:`, `Hypothesis:`, `Method:` and `Evaluation:`.",
        ),
        ChatMessage::user(format!("Topic: {}\n\nCommitted graph:\n{backbone}", packet.topic)),
    ]
}
