#![allow(dead_code)]

use eig_core::canonical::{content_hash, serialize_string};
use eig_core::control::{argmax, teacher_commit, teacher_scores};
use eig_core::graph::NodeInsert;
use eig_core::packet::Reference;
use eig_core::{
    build_slate, freeze_snapshot, graph_signals, init_graph, materialize_decision, merge_patches, role_branch,
    ActionKind, DecisionSource, IdeaGraph, InputPacket, NodeKind, Provenance, RoleId,
};
use eig_replay::record::{
    CommitEval, CommitRecord, DecisionRecord, EpisodeMeta, MergeRecord, PatchRecord, RoundStart, SignalsRecord,
    SlateRecord,
};
use eig_replay::{RecordBody, ReplayRecord, Trace};

/// How a role picks from its slate in a hand-built round.
#[derive(Clone, Copy, Debug)]
pub enum Pick {
    Teacher,
    Skip,
    /// First candidate of this kind.
    Kind(ActionKind),
}

pub struct EpisodeBuilder {
    pub trace: Trace,
    pub graph: IdeaGraph,
    pub t_max: u32,
    episode_id: String,
    group_id: String,
}

pub fn packet(group: &str) -> InputPacket {
    let mut p = InputPacket::new(group, format!("topic of {group}"));
    p.references.push(Reference {
        title: "A reference".into(),
        snippet: "what it says".into(),
    });
    p
}

impl EpisodeBuilder {
    /// Problem, one reference, and a hypothesis, method and evaluation plan on role branches.
    pub fn new(group: &str, seed: u64, t_max: u32) -> Self {
        let packet = packet(group);
        let mut graph = init_graph(&packet).unwrap();
        for (role, kind, text) in [
            (RoleId::MechanismProposer, NodeKind::Hypothesis, "a hypothesis"),
            (RoleId::MechanismProposer, NodeKind::Method, "a method"),
            (RoleId::EvaluationDesigner, NodeKind::EvalPlan, "an evaluation"),
        ] {
            graph.insert_node(NodeInsert {
                kind,
                text: text.into(),
                role: Some(role),
                branch: role_branch(role),
                confidence: 0.5,
                evidence: Vec::new(),
                provenance: Provenance::Agent,
            });
        }
        let mut b = EpisodeBuilder {
            trace: Trace::new(),
            graph,
            t_max,
            episode_id: format!("{group}.{seed}.heuristic"),
            group_id: group.into(),
        };
        b.push(
            0,
            RecordBody::EpisodeMeta(EpisodeMeta {
                packet,
                seed,
                controller: "heuristic".into(),
                t_max,
                sequential: false,
                config: serde_json::json!({}),
            }),
        );
        b
    }

    pub fn push(&mut self, round: u32, body: RecordBody) {
        self.trace
            .push(ReplayRecord {
                episode_id: self.episode_id.clone(),
                group_id: self.group_id.clone(),
                round,
                body,
            })
            .unwrap();
    }

    /// Runs one round with the given picks and returns whether it committed.
    pub fn round(&mut self, picks: &[(RoleId, Pick)]) -> bool {
        let round = self.graph.round + 1;
        let snapshot = freeze_snapshot(&self.graph);
        self.push(
            round,
            RecordBody::RoundStart(RoundStart {
                snapshot_hash: snapshot.hash().to_string(),
                snapshot: String::from_utf8(snapshot.to_bytes()).unwrap(),
                active_roles: picks.iter().map(|(r, _)| *r).collect(),
                signals: graph_signals(&self.graph),
            }),
        );
        let mut chosen = Vec::new();
        for (role, pick) in picks {
            let (slate, _) = build_slate(&snapshot, *role, round, &[]);
            let scores = teacher_scores(&snapshot, &slate);
            let index = match pick {
                Pick::Teacher => argmax(&scores),
                Pick::Skip => slate.skip_index(),
                Pick::Kind(k) => slate
                    .candidates
                    .iter()
                    .position(|c| c.kind == *k)
                    .unwrap_or_else(|| panic!("no {k:?} candidate for {role:?} in round {round}")),
            };
            self.push(
                round,
                RecordBody::Slate(SlateRecord {
                    role: *role,
                    slate: slate.clone(),
                    slate_hash: slate.hash(),
                    agent_suggestions: 0,
                    dropped_lines: 0,
                    dropped_invalid: 0,
                    agent_failure: None,
                }),
            );
            chosen.push((slate, scores, index));
        }
        let mut patches = Vec::new();
        for (slate, scores, index) in &chosen {
            self.push(
                round,
                RecordBody::Decision(DecisionRecord {
                    role: slate.role,
                    slate_hash: slate.hash(),
                    candidate_index: *index,
                    candidate: slate.candidates[*index].clone(),
                    source: DecisionSource::Heuristic,
                    teacher_scores: scores.clone(),
                    learned_scores: None,
                    calibrated_scores: None,
                }),
            );
            let action = slate.candidates[*index].to_action(slate.role, round, DecisionSource::Heuristic);
            patches.push(materialize_decision(&snapshot, &action).unwrap());
        }
        for p in patches.iter().filter(|p| !p.empty) {
            self.push(round, RecordBody::Patch(PatchRecord { role: p.role, patch: p.clone() }));
        }
        let mut merged = merge_patches(&self.graph, &patches).unwrap();
        merged.round = round;
        self.push(
            round,
            RecordBody::Merge(MergeRecord {
                graph_hash: content_hash(&merged),
                graph: serialize_string(&merged),
            }),
        );
        let signals = graph_signals(&merged);
        self.push(round, RecordBody::Signals(SignalsRecord { signals }));
        let label = teacher_commit(&merged, round, self.t_max);
        self.push(
            round,
            RecordBody::CommitEval(CommitEval {
                raw_score: None,
                calibrated_score: None,
                threshold: None,
                teacher_label: label,
                committed: label,
                forced: round >= self.t_max,
            }),
        );
        if label {
            self.push(round, RecordBody::Commit(CommitRecord { graph_hash: content_hash(&merged) }));
        }
        self.graph = merged;
        label
    }
}

/// A heuristic episode that lets the teacher choose for every role until commit.
pub fn teacher_episode(group: &str, seed: u64, t_max: u32) -> Trace {
    let mut b = EpisodeBuilder::new(group, seed, t_max);
    let roles = [RoleId::MechanismProposer, RoleId::EvaluationDesigner, RoleId::NoveltyExaminer];
    while !b.round(&roles.map(|r| (r, Pick::Teacher))) {}
    b.trace
}
