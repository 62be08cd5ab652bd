//! Turning graphs and candidates into critic inputs.

use std::collections::BTreeMap;

use eig_core::graph::Node;
use eig_core::kinds::{ActionKind, NodeKind};
use eig_core::slates::Candidate;
use eig_core::{IdeaGraph, SignalVector};

use crate::embed::{encode_checked, Embedder};
use crate::error::{CriticError, Result};
use crate::layout::{COMMIT_FEATURES, RELATIONS};

/// Maximum characters of flattened state text.
pub const STATE_TEXT_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeInput {
    pub src: usize,
    pub dst: usize,
    pub relation: usize,
    pub active: bool,
    pub resolved: bool,
}

impl EdgeInput {
    /// Message weight: zero when inactive, ten percent stronger when resolved.
    pub fn weight(&self) -> f64 {
        if self.active {
            1.0 + 0.1 * f64::from(u8::from(self.resolved))
        } else {
            0.0
        }
    }
}

/// Per-node raw inputs. Type and role embeddings are looked up at forward time.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphBatchInput {
    pub node_ids: Vec<String>,
    pub text: Vec<Vec<f64>>,
    pub node_kind: Vec<usize>,
    pub role: Vec<Option<usize>>,
    pub confidence: Vec<f64>,
    pub evidence_count: Vec<f64>,
    pub mask: Vec<bool>,
    pub edges: Vec<EdgeInput>,
    pub state_text: Vec<f64>,
}

impl GraphBatchInput {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|n| n == id)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for e in &self.edges {
            if e.relation >= RELATIONS {
                return Err(CriticError::RelationIndex(e.relation));
            }
            for index in [e.src, e.dst] {
                if index >= n {
                    return Err(CriticError::EdgeEndpoint { index, nodes: n });
                }
            }
        }
        Ok(())
    }

    /// Appends `count` masked padding nodes.
    pub fn padded(&self, count: usize) -> Self {
        let mut out = self.clone();
        for i in 0..count {
            out.node_ids.push(format!("pad-{i}"));
            out.text.push(vec![0.0; self.state_text.len()]);
            out.node_kind.push(0);
            out.role.push(None);
            out.confidence.push(0.0);
            out.evidence_count.push(0.0);
            out.mask.push(false);
        }
        out
    }
}

/// Candidate-specific inputs to the edit head.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateInput {
    pub text: Vec<f64>,
    pub kind: usize,
    pub target_mask: Vec<bool>,
    pub neighbor_mask: Vec<bool>,
}

fn ordering_key(n: &Node) -> (usize, &str, Option<usize>, String, &str) {
    let evidence = n
        .evidence
        .iter()
        .map(|e| format!("{}\u{1f}{}", e.source, e.snippet))
        .collect::<Vec<_>>()
        .join("\u{1e}");
    (n.kind.index(), n.text.as_str(), n.role.map(|r| r.index()), evidence, n.id.as_str())
}

/// Active nodes in content order, so relabeled but identical graphs featurize identically.
pub fn canonical_nodes(graph: &IdeaGraph) -> Vec<&Node> {
    let mut nodes: Vec<&Node> = graph.active_nodes().collect();
    nodes.sort_by_cached_key(|n| {
        let (k, t, r, e, id) = ordering_key(n);
        (k, t.to_string(), r, e, id.to_string())
    });
    nodes
}

/// Slot texts concatenated in kind order.
pub fn state_text(graph: &IdeaGraph) -> String {
    let mut text = String::new();
    for kind in NodeKind::SLOTS {
        for n in canonical_nodes(graph).into_iter().filter(|n| n.kind == kind) {
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(&n.text);
        }
    }
    text.chars().take(STATE_TEXT_LIMIT).collect()
}

pub fn featurize(graph: &IdeaGraph, embedder: &dyn Embedder) -> Result<GraphBatchInput> {
    let nodes = canonical_nodes(graph);
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let mut batch = GraphBatchInput {
        node_ids: nodes.iter().map(|n| n.id.clone()).collect(),
        text: Vec::with_capacity(nodes.len()),
        node_kind: nodes.iter().map(|n| n.kind.index()).collect(),
        role: nodes.iter().map(|n| n.role.map(|r| r.index())).collect(),
        confidence: nodes.iter().map(|n| n.confidence).collect(),
        evidence_count: nodes.iter().map(|n| n.evidence.len() as f64).collect(),
        mask: vec![true; nodes.len()],
        edges: Vec::new(),
        state_text: encode_checked(embedder, &state_text(graph))?,
    };
    for n in &nodes {
        batch.text.push(encode_checked(embedder, &n.text)?);
    }
    for e in graph.edges.values() {
        if let (Some(&src), Some(&dst)) = (index.get(e.src.as_str()), index.get(e.dst.as_str())) {
            batch.edges.push(EdgeInput {
                src,
                dst,
                relation: e.kind.index(),
                active: e.active,
                resolved: e.resolved,
            });
        }
    }
    batch
        .edges
        .sort_by_key(|e| (e.src, e.dst, e.relation, e.active, e.resolved));
    Ok(batch)
}

/// Node ids a candidate is about; edge targets resolve to their endpoints.
pub fn target_nodes(graph: &IdeaGraph, candidate: &Candidate) -> Vec<String> {
    let mut out = Vec::new();
    for t in &candidate.targets {
        if graph.nodes.contains_key(t) {
            out.push(t.clone());
        } else if let Some(e) = graph.edge(t) {
            out.push(e.src.clone());
            out.push(e.dst.clone());
        }
    }
    out
}

/// Id-free description of a candidate used for its text embedding.
pub fn candidate_text(graph: &IdeaGraph, candidate: &Candidate) -> String {
    let mut parts = vec![candidate.kind.token().replace('_', " ")];
    for id in target_nodes(graph, candidate) {
        if let Some(n) = graph.node(&id) {
            parts.push(n.text.clone());
        }
    }
    if let Some(t) = &candidate.payload.text {
        parts.push(t.clone());
    }
    if let Some(e) = &candidate.payload.evidence {
        parts.push(e.snippet.clone());
    }
    parts.join(" | ")
}

pub fn candidate_input(
    graph: &IdeaGraph,
    batch: &GraphBatchInput,
    candidate: &Candidate,
    embedder: &dyn Embedder,
) -> Result<CandidateInput> {
    let n = batch.len();
    let mut target_mask = vec![false; n];
    for id in target_nodes(graph, candidate) {
        if let Some(i) = batch.position(&id) {
            target_mask[i] = true;
        }
    }
    let mut neighbor_mask = vec![false; n];
    for e in batch.edges.iter().filter(|e| e.active) {
        if target_mask[e.src] && !target_mask[e.dst] {
            neighbor_mask[e.dst] = true;
        }
        if target_mask[e.dst] && !target_mask[e.src] {
            neighbor_mask[e.src] = true;
        }
    }
    Ok(CandidateInput {
        text: encode_checked(embedder, &candidate_text(graph, candidate))?,
        kind: candidate.kind.index(),
        target_mask,
        neighbor_mask,
    })
}

/// Post-round scalars: support coverage, unresolved contradiction ratio, maturity.
pub fn commit_features(signals: &SignalVector) -> [f64; COMMIT_FEATURES] {
    [signals.components.s_sup, signals.components.l_edge, signals.maturity]
}

pub fn skip_kind() -> usize {
    ActionKind::Skip.index()
}
