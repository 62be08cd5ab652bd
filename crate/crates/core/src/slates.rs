//! Role-local candidate slates built on a frozen snapshot.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_json, sha256_hex};
use crate::graph::{ActionPayload, Evidence, GraphAction, IdeaGraph, Node};
use crate::kinds::{ActionKind, DecisionSource, DeficitKind, EdgeKind, NodeKind, RoleId};
use crate::patch::materialize_decision;
use crate::signals::{dominant_deficit, graph_signals};
use crate::snapshot::Snapshot;

/// Non-skip candidates kept per slate.
pub const MAX_SLATE_CANDIDATES: usize = 8;
/// Lexical contradiction pairs proposed per role and round.
pub const MAX_CONTRADICTION_PAIRS: usize = 4;
/// Shared content tokens needed to flag two claims as plausibly conflicting.
pub const CONFLICT_TOKEN_OVERLAP: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateOrigin {
    Heuristic,
    Agent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub kind: ActionKind,
    pub targets: Vec<String>,
    pub payload: ActionPayload,
    pub proposer: RoleId,
    pub text: String,
    pub origin: CandidateOrigin,
}

impl Candidate {
    pub fn skip(role: RoleId) -> Self {
        Candidate {
            kind: ActionKind::Skip,
            targets: Vec::new(),
            payload: ActionPayload::default(),
            proposer: role,
            text: "skip".into(),
            origin: CandidateOrigin::Heuristic,
        }
    }

    pub fn new(
        kind: ActionKind,
        targets: Vec<String>,
        payload: ActionPayload,
        proposer: RoleId,
        origin: CandidateOrigin,
    ) -> Self {
        let text = describe(kind, &targets, &payload);
        Candidate {
            kind,
            targets,
            payload,
            proposer,
            text,
            origin,
        }
    }

    /// Identity used for deduplication: kind, ordered targets, payload.
    pub fn dedup_key(&self) -> (ActionKind, Vec<String>, ActionPayload) {
        (self.kind, self.targets.clone(), self.payload.clone())
    }

    pub fn payload_hash(&self) -> String {
        sha256_hex(canonical_json(&self.payload).as_bytes())
    }

    /// The candidate as a decision record for `role` in `round`.
    pub fn to_action(&self, role: RoleId, round: u32, source: DecisionSource) -> GraphAction {
        GraphAction {
            round,
            role,
            kind: self.kind,
            targets: self.targets.clone(),
            payload: self.payload.clone(),
            rationale: self.text.clone(),
            source,
            timestamp: 0,
        }
    }

    fn canonical_key(&self) -> (usize, Vec<String>, String, Vec<String>) {
        let mut sorted = self.targets.clone();
        sorted.sort();
        (self.kind.merge_rank(), sorted, self.payload_hash(), self.targets.clone())
    }
}

fn describe(kind: ActionKind, targets: &[String], payload: &ActionPayload) -> String {
    match kind {
        ActionKind::Skip => "skip".into(),
        ActionKind::AttachEvidence => format!(
            "attach_evidence {} <- {}",
            targets.join(","),
            payload.evidence.as_ref().map_or("?", |e| e.source.as_str())
        ),
        ActionKind::ProposeRepair => format!("propose_repair {}", targets.join(",")),
        _ => format!("{} {}", kind, targets.join(" -> ")),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slate {
    pub role: RoleId,
    pub round: u32,
    pub candidates: Vec<Candidate>,
    pub snapshot_hash: String,
}

impl Slate {
    pub fn hash(&self) -> String {
        sha256_hex(canonical_json(self).as_bytes())
    }

    pub fn skip_index(&self) -> usize {
        self.candidates.len() - 1
    }
}

/// Output of candidate generation, with the number of agent suggestions dropped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GeneratedCandidates {
    pub candidates: Vec<Candidate>,
    pub dropped_suggestions: usize,
}

const STOP_WORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "can", "for", "from", "has", "have", "in",
    "into", "is", "it", "its", "of", "on", "or", "that", "the", "their", "this", "to", "using",
    "via", "we", "will", "with", "which", "while", "than", "then", "these", "those", "does", "not",
];

/// Case-folded content tokens with stop words removed.
pub fn content_tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .filter(|t| !STOP_WORDS.contains(&t.as_str()))
        .collect()
}

fn upstream_partner<'a>(graph: &'a IdeaGraph, node: &Node) -> Option<&'a Node> {
    node.kind.upstream().iter().find_map(|kind| {
        graph
            .active_nodes()
            .find(|n| n.kind == *kind && n.id != node.id)
    })
}

fn evidence_pool(graph: &IdeaGraph) -> Vec<Evidence> {
    graph
        .active_nodes()
        .filter(|n| n.kind == NodeKind::EvidenceNeed)
        .flat_map(|n| n.evidence.iter().cloned())
        .collect()
}

fn pick_evidence(graph: &IdeaGraph, pool: &[Evidence], node: &Node) -> Option<Evidence> {
    let tokens = content_tokens(&node.text);
    let fresh = pool.iter().filter(|e| !node.evidence.contains(e));
    let best = fresh
        .map(|e| {
            let overlap = content_tokens(&format!("{} {}", e.source, e.snippet))
                .intersection(&tokens)
                .count();
            (overlap, e)
        })
        .fold(None::<(usize, &Evidence)>, |best, cur| match best {
            Some(b) if b.0 >= cur.0 => Some(b),
            _ => Some(cur),
        });
    if let Some((_, e)) = best {
        return Some(e.clone());
    }
    if !node.evidence.is_empty() {
        return None;
    }
    graph
        .active_nodes()
        .find(|n| n.kind == NodeKind::Problem)
        .map(|p| Evidence {
            source: "topic".into(),
            snippet: p.text.clone(),
        })
}

fn truncate(text: &str, max: usize) -> String {
    if text.chars().count() <= max {
        text.to_string()
    } else {
        let mut s: String = text.chars().take(max).collect();
        s.push_str("...");
        s
    }
}

/// Heuristic candidates enumerated from the snapshot's deficits.
pub fn heuristic_candidates(snapshot: &Snapshot, role: RoleId, round: u32) -> Vec<Candidate> {
    let graph = snapshot.graph();
    let live: Vec<_> = graph.live_edges().collect();
    let pool = evidence_pool(graph);
    let mut out = Vec::new();
    let mut push = |kind: ActionKind, targets: Vec<String>, payload: ActionPayload| {
        if kind.allowed_in_round(round) {
            out.push(Candidate::new(kind, targets, payload, role, CandidateOrigin::Heuristic));
        }
    };

    let supported: BTreeSet<&str> = live
        .iter()
        .filter(|e| e.kind == EdgeKind::Supports)
        .flat_map(|e| [e.src.as_str(), e.dst.as_str()])
        .collect();
    for node in graph.active_nodes().filter(|n| n.kind.is_focus()) {
        let unsupported = !supported.contains(node.id.as_str());
        if unsupported {
            if let Some(partner) = upstream_partner(graph, node) {
                push(
                    ActionKind::AddSupportEdge,
                    vec![node.id.clone(), partner.id.clone()],
                    ActionPayload::default(),
                );
            }
        }
        if unsupported || node.evidence.is_empty() {
            if let Some(ev) = pick_evidence(graph, &pool, node) {
                push(
                    ActionKind::AttachEvidence,
                    vec![node.id.clone()],
                    ActionPayload::with_evidence(ev),
                );
            }
        }
    }

    let chain_linked: BTreeSet<&str> = live
        .iter()
        .filter(|e| {
            matches!(e.kind, EdgeKind::Supports | EdgeKind::DependsOn)
                && graph.nodes[&e.dst].kind.is_slot()
        })
        .map(|e| e.src.as_str())
        .collect();
    for node in graph
        .active_nodes()
        .filter(|n| matches!(n.kind, NodeKind::Hypothesis | NodeKind::Method | NodeKind::EvalPlan))
    {
        if chain_linked.contains(node.id.as_str()) {
            continue;
        }
        if let Some(partner) = upstream_partner(graph, node) {
            push(
                ActionKind::AddDependencyEdge,
                vec![node.id.clone(), partner.id.clone()],
                ActionPayload::default(),
            );
        }
    }

    let claims: Vec<(&Node, BTreeSet<String>)> = graph
        .active_nodes()
        .filter(|n| matches!(n.kind, NodeKind::Hypothesis | NodeKind::NoveltyClaim))
        .map(|n| (n, content_tokens(&n.text)))
        .collect();
    let mut pairs = 0;
    'outer: for (i, (a, ta)) in claims.iter().enumerate() {
        for (b, tb) in &claims[i + 1..] {
            if pairs == MAX_CONTRADICTION_PAIRS {
                break 'outer;
            }
            if ta.intersection(tb).count() >= CONFLICT_TOKEN_OVERLAP
                && !graph.has_contradiction_between(&a.id, &b.id)
            {
                push(
                    ActionKind::AddContradictionEdge,
                    vec![a.id.clone(), b.id.clone()],
                    ActionPayload::default(),
                );
                pairs += 1;
            }
        }
    }

    for edge in live.iter().filter(|e| e.kind == EdgeKind::Contradicts && !e.resolved) {
        let text = format!(
            "Reconcile \"{}\" with \"{}\"",
            truncate(&graph.nodes[&edge.src].text, 80),
            truncate(&graph.nodes[&edge.dst].text, 80)
        );
        push(
            ActionKind::ProposeRepair,
            vec![edge.id.clone()],
            ActionPayload::with_text(text),
        );
    }
    out
}

/// True when the candidate is legal for the round and realizable on the snapshot.
pub fn candidate_is_valid(snapshot: &Snapshot, candidate: &Candidate, round: u32) -> bool {
    candidate.kind.allowed_in_round(round)
        && materialize_decision(
            snapshot,
            &candidate.to_action(candidate.proposer, round, DecisionSource::Heuristic),
        )
        .is_ok()
}

pub fn generate_candidates(
    snapshot: &Snapshot,
    role: RoleId,
    round: u32,
    agent_suggestions: &[Candidate],
) -> GeneratedCandidates {
    let mut candidates = heuristic_candidates(snapshot, role, round);
    let mut dropped = 0;
    for s in agent_suggestions {
        if s.kind == ActionKind::Skip {
            continue;
        }
        if candidate_is_valid(snapshot, s, round) {
            let mut s = s.clone();
            s.origin = CandidateOrigin::Agent;
            candidates.push(s);
        } else {
            dropped += 1;
        }
    }
    GeneratedCandidates {
        candidates,
        dropped_suggestions: dropped,
    }
}

/// Node kinds a candidate touches, resolving edge targets to their endpoints.
fn touched_kinds(graph: &IdeaGraph, c: &Candidate) -> Vec<NodeKind> {
    let mut kinds = Vec::new();
    for t in &c.targets {
        if let Some(n) = graph.node(t) {
            kinds.push(n.kind);
        } else if let Some(e) = graph.edge(t) {
            for end in [&e.src, &e.dst] {
                if let Some(n) = graph.node(end) {
                    kinds.push(n.kind);
                }
            }
        }
    }
    kinds
}

/// Whether a candidate falls in the role's specialty.
pub fn matches_specialty(graph: &IdeaGraph, role: RoleId, c: &Candidate) -> bool {
    let kinds = touched_kinds(graph, c);
    let has = |ks: &[NodeKind]| kinds.iter().any(|k| ks.contains(k));
    match role {
        RoleId::MechanismProposer => has(&[NodeKind::Method, NodeKind::Hypothesis]),
        RoleId::FeasibilityCritic => has(&[NodeKind::Risk, NodeKind::Assumption]),
        RoleId::NoveltyExaminer => {
            has(&[NodeKind::NoveltyClaim])
                || matches!(c.kind, ActionKind::AddContradictionEdge | ActionKind::ProposeRepair)
        }
        RoleId::EvaluationDesigner => {
            has(&[NodeKind::EvalPlan]) || c.kind == ActionKind::AddDependencyEdge
        }
        RoleId::ImpactReframer => has(&[NodeKind::Problem]) || c.kind == ActionKind::AddSupportEdge,
    }
}

fn same_pair(a: &[String], b: &[String]) -> bool {
    a.len() == 2 && b.len() == 2 && ((a[0] == b[0] && a[1] == b[1]) || (a[0] == b[1] && a[1] == b[0]))
}

pub fn validate_slate(candidates: &[Candidate], snapshot: &Snapshot, role: RoleId, round: u32) -> Slate {
    let graph = snapshot.graph();
    let mut seen = BTreeSet::new();
    let mut kept: Vec<Candidate> = Vec::new();
    for c in candidates {
        if c.kind == ActionKind::Skip || !candidate_is_valid(snapshot, c, round) {
            continue;
        }
        if seen.insert(c.dedup_key()) {
            kept.push(c.clone());
        }
    }

    let contradiction_pairs: Vec<Vec<String>> = kept
        .iter()
        .filter(|c| c.kind == ActionKind::AddContradictionEdge)
        .map(|c| c.targets.clone())
        .collect();
    kept.retain(|c| {
        if c.kind != ActionKind::AddDependencyEdge {
            return true;
        }
        let (a, b) = (&c.targets[0], &c.targets[1]);
        !graph.has_contradiction_between(a, b)
            && !contradiction_pairs.iter().any(|p| same_pair(p, &c.targets))
    });

    if kept.len() > MAX_SLATE_CANDIDATES {
        let dominant: DeficitKind = dominant_deficit(&graph_signals(graph));
        kept.sort_by_cached_key(|c| {
            (
                c.kind.targeted_deficit() != Some(dominant),
                !matches_specialty(graph, role, c),
                c.canonical_key(),
            )
        });
        kept.truncate(MAX_SLATE_CANDIDATES);
    }

    kept.sort_by_cached_key(Candidate::canonical_key);
    kept.push(Candidate::skip(role));
    Slate {
        role,
        round,
        candidates: kept,
        snapshot_hash: snapshot.hash().to_string(),
    }
}

/// Generation followed by validation.
pub fn build_slate(
    snapshot: &Snapshot,
    role: RoleId,
    round: u32,
    agent_suggestions: &[Candidate],
) -> (Slate, usize) {
    let generated = generate_candidates(snapshot, role, round, agent_suggestions);
    (
        validate_slate(&generated.candidates, snapshot, role, round),
        generated.dropped_suggestions,
    )
}
