//! Final proposal synthesis from a committed backbone.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use eig_agents::prompt::build_synthesis_prompt;
use eig_agents::TextBackend;
use eig_core::canonical::serialize_string;
use eig_core::{EdgeKind, Evidence, IdeaGraph, InputPacket, NodeKind};

pub const SECTIONS: [&str; 5] = ["title", "problem", "hypothesis", "method", "evaluation"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub title: String,
    pub problem: String,
    pub hypothesis: String,
    pub method: String,
    pub evaluation: String,
    /// Backbone node ids behind each section.
    pub provenance: BTreeMap<String, Vec<String>>,
    pub evidence: Vec<Evidence>,
}

impl Proposal {
    pub fn section(&self, name: &str) -> Option<&str> {
        match name {
            "title" => Some(&self.title),
            "problem" => Some(&self.problem),
            "hypothesis" => Some(&self.hypothesis),
            "method" => Some(&self.method),
            "evaluation" => Some(&self.evaluation),
            _ => None,
        }
    }

    fn section_mut(&mut self, name: &str) -> &mut String {
        match name {
            "title" => &mut self.title,
            "problem" => &mut self.problem,
            "hypothesis" => &mut self.hypothesis,
            "method" => &mut self.method,
            _ => &mut self.evaluation,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    pub proposal: Proposal,
    /// Backend output was unusable and the template was used instead.
    pub fallback: bool,
}

fn slot_section(kind: NodeKind) -> Option<&'static str> {
    match kind {
        NodeKind::Problem => Some("problem"),
        NodeKind::Hypothesis => Some("hypothesis"),
        NodeKind::Method => Some("method"),
        NodeKind::EvalPlan => Some("evaluation"),
        _ => None,
    }
}

/// Section of every backbone node: slots by kind, repairs by the slot they repair.
fn node_sections(backbone: &IdeaGraph) -> BTreeMap<&str, &'static str> {
    let mut out = BTreeMap::new();
    for n in backbone.active_nodes() {
        if let Some(s) = slot_section(n.kind) {
            out.insert(n.id.as_str(), s);
        }
    }
    for e in backbone.live_edges().filter(|e| e.kind == EdgeKind::Repairs) {
        let target = backbone.node(&e.dst).and_then(|n| slot_section(n.kind));
        if let Some(s) = target {
            out.insert(e.src.as_str(), s);
        }
    }
    out
}

fn provenance(backbone: &IdeaGraph) -> BTreeMap<String, Vec<String>> {
    let mut prov: BTreeMap<String, Vec<String>> = SECTIONS.iter().map(|s| (s.to_string(), Vec::new())).collect();
    for (id, section) in node_sections(backbone) {
        prov.get_mut(section).expect("known section").push(id.to_string());
    }
    let problem = prov["problem"].clone();
    prov.insert("title".into(), problem);
    prov
}

fn evidence(backbone: &IdeaGraph) -> Vec<Evidence> {
    let set: BTreeSet<Evidence> = backbone
        .active_nodes()
        .flat_map(|n| n.evidence.iter().cloned())
        .collect();
    set.into_iter().collect()
}

/// Concatenated slot texts with bracketed evidence citations.
pub fn template_proposal(backbone: &IdeaGraph, packet: &InputPacket) -> Proposal {
    let mut proposal = Proposal {
        provenance: provenance(backbone),
        evidence: evidence(backbone),
        ..Proposal::default()
    };
    for section in &SECTIONS[1..] {
        let parts: Vec<String> = proposal.provenance[*section]
            .iter()
            .filter_map(|id| backbone.node(id))
            .map(|n| {
                let mut text = n.text.trim().to_string();
                let cites: BTreeSet<&str> = n.evidence.iter().map(|e| e.source.as_str()).collect();
                if !cites.is_empty() {
                    let joined: Vec<&str> = cites.into_iter().collect();
                    text.push_str(&format!(" [{}]", joined.join("; ")));
                }
                text
            })
            .collect();
        *proposal.section_mut(section) = parts.join(" ");
    }
    if !proposal.provenance["title"].is_empty() {
        proposal.title = packet.problem_text().unwrap_or_else(|| proposal.problem.clone());
    }
    proposal
}

/// Splits a reply headed `Title:`, `Problem:`, ... into sections. A heading may
/// also stand alone on its line without the colon. Every heading must appear.
pub fn parse_sections(reply: &str) -> Option<BTreeMap<&'static str, String>> {
    let mut out: BTreeMap<&'static str, String> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for line in reply.lines() {
        let trimmed = line.trim().trim_start_matches(['#', '*', ' ']);
        let heading = SECTIONS.iter().find_map(|s| {
            let head = trimmed.get(..s.len())?;
            let tail = trimmed[s.len()..].trim_start_matches('*');
            let rest = match tail.strip_prefix(':') {
                Some(rest) => rest,
                None if tail.trim().is_empty() => "",
                None => return None,
            };
            head.eq_ignore_ascii_case(s).then(|| (*s, rest.trim_start_matches('*').trim()))
        });
        if let Some((s, rest)) = heading {
            if out.contains_key(s) {
                return None;
            }
            out.insert(s, rest.to_string());
            current = Some(s);
        } else if let Some(s) = current {
            let body = out.get_mut(s).expect("open section");
            if !line.trim().is_empty() {
                if !body.is_empty() {
                    body.push(' ');
                }
                body.push_str(line.trim());
            }
        }
    }
    (out.len() == SECTIONS.len()).then_some(out)
}

pub fn synthesize_proposal(
    backbone: &IdeaGraph,
    packet: &InputPacket,
    backend: Option<&dyn TextBackend>,
) -> Synthesis {
    let template = template_proposal(backbone, packet);
    let Some(backend) = backend else {
        return Synthesis {
            proposal: template,
            fallback: false,
        };
    };
    let messages = build_synthesis_prompt(packet, &serialize_string(backbone));
    let parsed = match backend.complete(&messages) {
        Ok(reply) => parse_sections(&reply),
        Err(e) => {
            tracing::warn!(group = %packet.group_id, error = %e, "synthesis backend failed");
            None
        }
    };
    match parsed {
        Some(sections) => {
            let mut proposal = Proposal {
                provenance: template.provenance,
                evidence: template.evidence,
                ..Proposal::default()
            };
            for (name, text) in sections {
                *proposal.section_mut(name) = text;
            }
            Synthesis {
                proposal,
                fallback: false,
            }
        }
        None => Synthesis {
            proposal: template,
            fallback: true,
        },
    }
}
