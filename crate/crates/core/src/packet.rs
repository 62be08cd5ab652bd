//! Benchmark-visible ideation input and graph initialization.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::graph::{Evidence, IdeaGraph, NodeInsert, INIT_BRANCH};
use crate::kinds::{NodeKind, Provenance};

/// At most this many references become EvidenceNeed nodes.
pub const MAX_INIT_REFERENCES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub title: String,
    #[serde(default)]
    pub snippet: String,
}

/// Only benchmark-visible fields; unknown fields are rejected on load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPacket {
    pub group_id: String,
    #[serde(default)]
    pub topic: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub references: Vec<Reference>,
    #[serde(default)]
    pub benchmark: String,
}

impl InputPacket {
    pub fn new(group_id: impl Into<String>, topic: impl Into<String>) -> Self {
        Self {
            group_id: group_id.into(),
            topic: topic.into(),
            keywords: Vec::new(),
            references: Vec::new(),
            benchmark: String::new(),
        }
    }

    fn keyword_text(&self) -> String {
        self.keywords
            .iter()
            .map(|k| k.trim())
            .filter(|k| !k.is_empty())
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Problem statement text: the topic, or the keyword list when the topic is blank.
    pub fn problem_text(&self) -> Option<String> {
        let topic = self.topic.trim();
        if !topic.is_empty() {
            return Some(topic.to_string());
        }
        let kw = self.keyword_text();
        (!kw.is_empty()).then(|| format!("Keywords: {kw}"))
    }
}

/// Seeds a graph with one Problem node and up to eight EvidenceNeed nodes.
pub fn init_graph(packet: &InputPacket) -> Result<IdeaGraph> {
    let problem = packet.problem_text().ok_or(CoreError::EmptyPacket)?;
    let mut graph = IdeaGraph::new(packet.group_id.clone());
    graph.insert_node(NodeInsert {
        kind: NodeKind::Problem,
        text: problem,
        role: None,
        branch: INIT_BRANCH.into(),
        confidence: 1.0,
        evidence: Vec::new(),
        provenance: Provenance::Init,
    });
    for reference in packet.references.iter().take(MAX_INIT_REFERENCES) {
        graph.insert_node(NodeInsert {
            kind: NodeKind::EvidenceNeed,
            text: reference.title.clone(),
            role: None,
            branch: INIT_BRANCH.into(),
            confidence: 1.0,
            evidence: vec![Evidence {
                source: reference.title.clone(),
                snippet: reference.snippet.clone(),
            }],
            provenance: Provenance::Init,
        });
    }
    Ok(graph)
}
