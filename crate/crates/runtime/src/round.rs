//! One edit round: frozen snapshot, role slates, controller decisions,
//! deterministic merge, and the post-round commit gate.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;

use eig_agents::{Agent, AgentRequest, TextBackend};
use eig_core::canonical::{content_hash, serialize_string};
use eig_core::control::{
    apply_safeguards, argmax, calibrate_commit, calibrate_edit, diversify, edit_trigger, random_select,
    teacher_scores, Decision, TeacherChoice,
};
use eig_core::slates::Slate;
use eig_core::{
    build_slate, extract_backbone, freeze_snapshot, graph_signals, materialize_decision, merge_patches,
    DecisionSource, IdeaGraph, InputPacket, Patch, RoleId, SignalVector, Snapshot,
};
use eig_replay::record::{
    CommitEval, CommitRecord, DecisionRecord, GuardRecord, MergeRecord, PatchRecord, RecordBody, RoundStart,
    SignalsRecord, SlateRecord,
};

use crate::activation::activate_roles_with;
use crate::config::{ControllerKind, RunConfig};
use crate::critic::{EncodedGraph, EncoderCache, LearnedCritic};
use crate::error::{Result, RuntimeError};

/// Everything an episode needs besides the packet.
#[derive(Clone)]
pub struct Runtime {
    pub config: RunConfig,
    pub agent: Arc<dyn Agent>,
    pub critic: Option<Arc<LearnedCritic>>,
    /// Used for synthesis only; role agents carry their own backend.
    pub synthesis_backend: Option<Arc<dyn TextBackend>>,
}

/// A role's slate together with the agent bookkeeping behind it.
#[derive(Clone, Debug)]
pub struct RoleSlate {
    pub slate: Slate,
    pub teacher_scores: Vec<f64>,
    pub agent_suggestions: usize,
    pub dropped_lines: usize,
    pub dropped_invalid: usize,
    pub agent_failure: Option<String>,
}

impl RoleSlate {
    fn record(&self) -> RecordBody {
        RecordBody::Slate(SlateRecord {
            role: self.slate.role,
            slate: self.slate.clone(),
            slate_hash: self.slate.hash(),
            agent_suggestions: self.agent_suggestions,
            dropped_lines: self.dropped_lines,
            dropped_invalid: self.dropped_invalid,
            agent_failure: self.agent_failure.clone(),
        })
    }
}

/// A controller's pick with the scores that produced it.
#[derive(Clone, Debug)]
pub struct Selection {
    pub decision: Decision,
    pub learned_scores: Option<Vec<f64>>,
    pub calibrated_scores: Option<Vec<f64>>,
}

impl Selection {
    fn record(&self, slate: &RoleSlate) -> RecordBody {
        RecordBody::Decision(DecisionRecord {
            role: self.decision.role,
            slate_hash: slate.slate.hash(),
            candidate_index: self.decision.candidate_index,
            candidate: self.decision.candidate.clone(),
            source: self.decision.source,
            teacher_scores: slate.teacher_scores.clone(),
            learned_scores: self.learned_scores.clone(),
            calibrated_scores: self.calibrated_scores.clone(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub round: u32,
    pub snapshot_hash: String,
    pub active_roles: Vec<RoleId>,
    /// Post-round graph with its round index set.
    pub graph: IdeaGraph,
    pub decisions: Vec<Decision>,
    pub patches: Vec<Patch>,
    pub signals: SignalVector,
    pub commit: CommitEval,
    pub committed: bool,
    /// Records in stream order, excluding guards.
    pub records: Vec<RecordBody>,
    pub guards: Vec<GuardRecord>,
}

fn guard(name: &str, role: Option<RoleId>, detail: String) -> GuardRecord {
    GuardRecord {
        guard: name.into(),
        role,
        detail,
    }
}

impl Runtime {
    pub fn new(config: RunConfig, agent: Arc<dyn Agent>) -> Self {
        Runtime {
            config,
            agent,
            critic: None,
            synthesis_backend: None,
        }
    }

    pub fn with_critic(mut self, critic: Arc<LearnedCritic>) -> Self {
        self.critic = Some(critic);
        self
    }

    pub fn with_synthesis_backend(mut self, backend: Arc<dyn TextBackend>) -> Self {
        self.synthesis_backend = Some(backend);
        self
    }

    pub(crate) fn learned_critic(&self) -> Result<Option<&LearnedCritic>> {
        match (self.config.controller, &self.critic) {
            (ControllerKind::Learned, Some(c)) => Ok(Some(c.as_ref())),
            (ControllerKind::Learned, None) => Err(RuntimeError::MissingCritic),
            _ => Ok(None),
        }
    }

    /// Active roles for the round, in canonical order, limited to the configured roles.
    pub fn active_roles(&self, graph: &IdeaGraph, round: u32) -> Vec<RoleId> {
        let allowed: Vec<RoleId> = RoleId::ALL.iter().copied().filter(|r| self.config.allows(*r)).collect();
        let woken: BTreeSet<RoleId> = activate_roles_with(&self.config.activation, graph, round);
        let active: Vec<RoleId> = allowed.iter().copied().filter(|r| woken.contains(r)).collect();
        if active.is_empty() {
            allowed
        } else {
            active
        }
    }

    /// Agent suggestions for one role, validated into a slate. A failed agent
    /// leaves the role with heuristic candidates only.
    pub fn role_slate(&self, snapshot: &Snapshot, role: RoleId, round: u32, packet: &InputPacket) -> RoleSlate {
        let request = AgentRequest::new(snapshot, role, round, packet);
        let proposals = self.agent.propose(&request);
        let suggestions = if proposals.failure.is_some() {
            &[][..]
        } else {
            &proposals.candidates[..]
        };
        let (slate, dropped_invalid) = build_slate(snapshot, role, round, suggestions);
        let teacher_scores = teacher_scores(snapshot, &slate);
        RoleSlate {
            slate,
            teacher_scores,
            agent_suggestions: proposals.candidates.len(),
            dropped_lines: proposals.dropped,
            dropped_invalid,
            agent_failure: proposals.failure,
        }
    }

    /// One role's decision under a non-heuristic controller, or the plain teacher pick.
    fn select(
        &self,
        snapshot: &Snapshot,
        slate: &RoleSlate,
        learned: Option<(&LearnedCritic, &EncodedGraph)>,
        group_id: &str,
        guards: &mut Vec<GuardRecord>,
    ) -> Result<Selection> {
        let teacher_pick = || {
            let best = argmax(&slate.teacher_scores);
            Decision::from_slate(&slate.slate, best, slate.teacher_scores[best], DecisionSource::Heuristic)
        };
        let plain = |decision| Selection {
            decision,
            learned_scores: None,
            calibrated_scores: None,
        };
        let role = slate.slate.role;
        match self.config.controller {
            ControllerKind::Heuristic => Ok(plain(teacher_pick())),
            ControllerKind::Random => Ok(plain(random_select(&slate.slate, self.config.seed, group_id))),
            ControllerKind::Learned => {
                let (critic, encoded) = learned.ok_or(RuntimeError::MissingCritic)?;
                let raw = critic.edit_scores(snapshot.graph(), encoded, &slate.slate)?;
                let pre = graph_signals(snapshot.graph());
                let calibrated = calibrate_edit(&raw, &pre, &slate.slate, &self.config.calibration);
                if let Some(trigger) = edit_trigger(&pre, &self.config.calibration) {
                    guards.push(guard("edit_calibration", Some(role), format!("{trigger:?}")));
                }
                let best = argmax(&calibrated);
                let learned = Decision::from_slate(&slate.slate, best, calibrated[best], DecisionSource::Learned);
                let outcome = apply_safeguards(&learned, &teacher_pick(), &slate.slate, snapshot);
                if let Some(reason) = outcome.reason {
                    guards.push(guard(
                        "safeguard",
                        Some(role),
                        format!("{reason:?}: candidate {} replaced by {}", best, outcome.decision.candidate_index),
                    ));
                }
                Ok(Selection {
                    decision: outcome.decision,
                    learned_scores: Some(raw),
                    calibrated_scores: Some(calibrated),
                })
            }
        }
    }

    /// Post-round commit gate. Returns the evaluation and whether the episode stops.
    fn commit_gate(
        &self,
        merged: &IdeaGraph,
        post: &SignalVector,
        round: u32,
        cache: &mut EncoderCache,
        guards: &mut Vec<GuardRecord>,
    ) -> Result<CommitEval> {
        let cfg = &self.config;
        let rule_fires = cfg.commit_rule.is_mature(post);
        let out_of_rounds = round >= cfg.t_max;
        let teacher_label = rule_fires || out_of_rounds;
        let (raw_score, calibrated_score, threshold, mut gate) = match self.learned_critic()? {
            Some(critic) => {
                let encoded = cache.get_or_encode(critic, merged, &content_hash(merged))?;
                let raw = critic.commit_score(&encoded, post);
                let calibrated = calibrate_commit(raw, post, &cfg.calibration);
                if calibrated != raw {
                    guards.push(guard("commit_calibration", None, format!("{raw:.6} -> {calibrated:.6}")));
                }
                let gamma = cfg.gamma_at(round);
                (Some(raw), Some(calibrated), Some(gamma), calibrated >= gamma)
            }
            None => (None, None, None, rule_fires),
        };
        if gate && !out_of_rounds && extract_backbone(merged).nodes.is_empty() {
            guards.push(guard("empty_backbone", None, "commit deferred".into()));
            gate = false;
        }
        Ok(CommitEval {
            raw_score,
            calibrated_score,
            threshold,
            teacher_label,
            committed: gate || out_of_rounds,
            forced: out_of_rounds && !gate,
        })
    }

    fn finish_round(
        &self,
        round: u32,
        mut merged: IdeaGraph,
        cache: &mut EncoderCache,
        guards: &mut Vec<GuardRecord>,
        records: &mut Vec<RecordBody>,
    ) -> Result<(IdeaGraph, SignalVector, CommitEval)> {
        merged.round = round;
        let post = graph_signals(&merged);
        let graph_hash = content_hash(&merged);
        records.push(RecordBody::Merge(MergeRecord {
            graph_hash: graph_hash.clone(),
            graph: serialize_string(&merged),
        }));
        records.push(RecordBody::Signals(SignalsRecord { signals: post }));
        let commit = self.commit_gate(&merged, &post, round, cache, guards)?;
        records.push(RecordBody::CommitEval(commit.clone()));
        if commit.committed {
            records.push(RecordBody::Commit(CommitRecord { graph_hash }));
        }
        Ok((merged, post, commit))
    }

    fn check_round(graph: &IdeaGraph, round: u32) -> Result<()> {
        if round == 0 || graph.round + 1 != round {
            return Err(RuntimeError::Config(format!(
                "round {round} cannot follow a graph at round {}",
                graph.round
            )));
        }
        Ok(())
    }

    /// Parallel round: every active role sees the same frozen snapshot.
    pub fn run_round(
        &self,
        graph: &IdeaGraph,
        round: u32,
        packet: &InputPacket,
        cache: &mut EncoderCache,
    ) -> Result<RoundOutcome> {
        Self::check_round(graph, round)?;
        let snapshot = freeze_snapshot(graph);
        let pre = graph_signals(graph);
        let roles = self.active_roles(graph, round);
        let slates: Vec<RoleSlate> = roles
            .par_iter()
            .map(|role| self.role_slate(&snapshot, *role, round, packet))
            .collect();

        let mut guards = Vec::new();
        for s in slates.iter().filter(|s| s.agent_failure.is_some()) {
            guards.push(guard(
                "agent_failure",
                Some(s.slate.role),
                s.agent_failure.clone().unwrap_or_default(),
            ));
        }

        let selections = match self.learned_critic()? {
            None if self.config.controller == ControllerKind::Heuristic => {
                let mut choices: Vec<TeacherChoice<'_>> = slates
                    .iter()
                    .map(|s| TeacherChoice {
                        slate: &s.slate,
                        scores: s.teacher_scores.clone(),
                        selected: argmax(&s.teacher_scores),
                    })
                    .collect();
                for (pos, previous) in diversify(&mut choices) {
                    guards.push(guard(
                        "diversity",
                        Some(choices[pos].slate.role),
                        format!("candidate {previous} -> {}", choices[pos].selected),
                    ));
                }
                choices
                    .iter()
                    .map(|c| Selection {
                        decision: Decision::from_slate(
                            c.slate,
                            c.selected,
                            c.scores[c.selected],
                            DecisionSource::Heuristic,
                        ),
                        learned_scores: None,
                        calibrated_scores: None,
                    })
                    .collect::<Vec<_>>()
            }
            critic => {
                let encoded = match critic {
                    Some(c) => Some(cache.get_or_encode(c, graph, snapshot.hash())?),
                    None => None,
                };
                let learned = critic.zip(encoded.as_deref());
                let mut out = Vec::with_capacity(slates.len());
                for s in &slates {
                    out.push(self.select(&snapshot, s, learned, &graph.group_id, &mut guards)?);
                }
                out
            }
        };

        let patches = selections
            .iter()
            .map(|s| {
                let d = &s.decision;
                materialize_decision(&snapshot, &d.candidate.to_action(d.role, round, d.source))
            })
            .collect::<eig_core::Result<Vec<Patch>>>()?;
        let merged = merge_patches(graph, &patches)?;

        let mut records = vec![RecordBody::RoundStart(RoundStart {
            snapshot_hash: snapshot.hash().to_string(),
            snapshot: String::from_utf8(snapshot.to_bytes()).expect("canonical serialization is UTF-8"),
            active_roles: roles.clone(),
            signals: pre,
        })];
        records.extend(slates.iter().map(RoleSlate::record));
        records.extend(selections.iter().zip(&slates).map(|(sel, s)| sel.record(s)));
        records.extend(patches.iter().map(|p| {
            RecordBody::Patch(PatchRecord {
                role: p.role,
                patch: p.clone(),
            })
        }));
        let (graph, signals, commit) = self.finish_round(round, merged, cache, &mut guards, &mut records)?;
        Ok(RoundOutcome {
            round,
            snapshot_hash: snapshot.hash().to_string(),
            active_roles: roles,
            graph,
            decisions: selections.into_iter().map(|s| s.decision).collect(),
            patches,
            signals,
            committed: commit.committed,
            commit,
            records,
            guards,
        })
    }

    /// Sequential round: roles act one by one and each sees the earlier
    /// same-round merges. Records are still grouped by type.
    pub fn run_round_sequential(
        &self,
        graph: &IdeaGraph,
        round: u32,
        packet: &InputPacket,
        cache: &mut EncoderCache,
    ) -> Result<RoundOutcome> {
        Self::check_round(graph, round)?;
        let start = freeze_snapshot(graph);
        let roles = self.active_roles(graph, round);
        let order = self.config.role_order.arrange(&roles, round);

        let mut guards = Vec::new();
        let mut current = graph.clone();
        let mut slates = Vec::new();
        let mut selections = Vec::new();
        let mut patches = Vec::new();
        let mut merges = Vec::new();
        for role in order {
            let snapshot = freeze_snapshot(&current);
            let slate = self.role_slate(&snapshot, role, round, packet);
            if let Some(f) = &slate.agent_failure {
                guards.push(guard("agent_failure", Some(role), f.clone()));
            }
            let critic = self.learned_critic()?;
            let encoded = match critic {
                Some(c) => Some(cache.get_or_encode(c, &current, snapshot.hash())?),
                None => None,
            };
            let selection = self.select(
                &snapshot,
                &slate,
                critic.zip(encoded.as_deref()),
                &graph.group_id,
                &mut guards,
            )?;
            let d = &selection.decision;
            let patch = materialize_decision(&snapshot, &d.candidate.to_action(d.role, round, d.source))?;
            current = merge_patches(&current, std::slice::from_ref(&patch))?;
            merges.push(RecordBody::Merge(MergeRecord {
                graph_hash: content_hash(&current),
                graph: serialize_string(&current),
            }));
            slates.push(slate);
            selections.push(selection);
            patches.push(patch);
        }

        let mut records = vec![RecordBody::RoundStart(RoundStart {
            snapshot_hash: start.hash().to_string(),
            snapshot: String::from_utf8(start.to_bytes()).expect("canonical serialization is UTF-8"),
            active_roles: roles.clone(),
            signals: graph_signals(graph),
        })];
        records.extend(slates.iter().map(RoleSlate::record));
        records.extend(selections.iter().zip(&slates).map(|(sel, s)| sel.record(s)));
        records.extend(patches.iter().map(|p| {
            RecordBody::Patch(PatchRecord {
                role: p.role,
                patch: p.clone(),
            })
        }));
        // The last per-role merge is the round's merge; earlier ones precede it.
        merges.pop();
        records.extend(merges);
        let (graph, signals, commit) = self.finish_round(round, current, cache, &mut guards, &mut records)?;
        Ok(RoundOutcome {
            round,
            snapshot_hash: start.hash().to_string(),
            active_roles: roles,
            graph,
            decisions: selections.into_iter().map(|s| s.decision).collect(),
            patches,
            signals,
            committed: commit.committed,
            commit,
            records,
            guards,
        })
    }
}
