//! Heuristic teacher, commit rule, random controller, calibration, and safeguards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::sha256_hex;
use crate::error::{CoreError, Result};
use crate::graph::IdeaGraph;
use crate::kinds::{ActionKind, DecisionSource, RoleId};
use crate::merge::merge_patches;
use crate::patch::materialize_decision;
use crate::signals::{dominant_deficit, graph_signals, SignalVector};
use crate::slates::{Candidate, Slate};
use crate::snapshot::Snapshot;

/// Weight of the maturity change in the teacher score.
pub const TEACHER_MATURITY_WEIGHT: f64 = 0.25;
/// Pre-state maturity at which skip earns its bonus.
pub const SKIP_MATURITY_GATE: f64 = 0.8;
pub const SKIP_MATURITY_BONUS: f64 = 0.1;
/// Teacher-score deficit beyond which a learned kind swap is overruled.
pub const LOW_GAIN_SWAP_MARGIN: f64 = 0.05;
/// Score tolerance within which a distinct-target alternative is preferred.
pub const DIVERSITY_TOLERANCE: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub role: RoleId,
    pub candidate_index: usize,
    pub candidate: Candidate,
    pub score: f64,
    pub source: DecisionSource,
}

impl Decision {
    pub fn from_slate(slate: &Slate, index: usize, score: f64, source: DecisionSource) -> Self {
        Decision {
            role: slate.role,
            candidate_index: index,
            candidate: slate.candidates[index].clone(),
            score,
            source,
        }
    }

    pub fn is_skip(&self) -> bool {
        self.candidate.kind == ActionKind::Skip
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub bias_cap: f64,
    pub low_threshold: f64,
    pub high_threshold: f64,
    pub commit_threshold_shift: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            bias_cap: 0.15,
            low_threshold: 0.4,
            high_threshold: 0.7,
            commit_threshold_shift: 0.1,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.bias_cap > 0.0
            && 0.0 < self.low_threshold
            && self.low_threshold < self.high_threshold
            && self.high_threshold < 1.0
            && self.commit_threshold_shift >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(CoreError::Integrity(format!("invalid calibration config: {self:?}")))
        }
    }
}

/// Thresholds of the heuristic continue-or-commit rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommitRule {
    pub min_maturity: f64,
    pub max_contradiction_load: f64,
    pub require_all_slots: bool,
}

impl Default for CommitRule {
    fn default() -> Self {
        CommitRule {
            min_maturity: 0.75,
            max_contradiction_load: 0.1,
            require_all_slots: true,
        }
    }
}

impl CommitRule {
    pub fn is_mature(&self, signals: &SignalVector) -> bool {
        signals.maturity >= self.min_maturity
            && signals.contradiction_load <= self.max_contradiction_load
            && (!self.require_all_slots || signals.components.q_slot >= 1.0)
    }
}

/// Graph produced by realizing one candidate alone on the snapshot.
pub fn simulate(snapshot: &Snapshot, candidate: &Candidate) -> Result<IdeaGraph> {
    let action = candidate.to_action(candidate.proposer, snapshot.round() + 1, DecisionSource::Heuristic);
    let patch = materialize_decision(snapshot, &action)?;
    merge_patches(snapshot.graph(), std::slice::from_ref(&patch))
}

pub fn teacher_score(snapshot: &Snapshot, candidate: &Candidate) -> f64 {
    let pre = graph_signals(snapshot.graph());
    teacher_score_from(snapshot, &pre, candidate)
}

fn teacher_score_from(snapshot: &Snapshot, pre: &SignalVector, candidate: &Candidate) -> f64 {
    if candidate.kind == ActionKind::Skip {
        return if pre.maturity >= SKIP_MATURITY_GATE {
            SKIP_MATURITY_BONUS
        } else {
            0.0
        };
    }
    let Ok(post_graph) = simulate(snapshot, candidate) else {
        return f64::NEG_INFINITY;
    };
    let post = graph_signals(&post_graph);
    let dominant = dominant_deficit(pre);
    let deficit_reduction = pre.deficit(dominant) - post.deficit(dominant);
    deficit_reduction + TEACHER_MATURITY_WEIGHT * (post.maturity - pre.maturity)
}

/// Teacher scores for every slate candidate, in slate order.
pub fn teacher_scores(snapshot: &Snapshot, slate: &Slate) -> Vec<f64> {
    let pre = graph_signals(snapshot.graph());
    slate
        .candidates
        .iter()
        .map(|c| teacher_score_from(snapshot, &pre, c))
        .collect()
}

/// Index of the maximum score; the lowest index wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn teacher_select(snapshot: &Snapshot, slate: &Slate) -> Decision {
    let scores = teacher_scores(snapshot, slate);
    let best = argmax(&scores);
    Decision::from_slate(slate, best, scores[best], DecisionSource::Heuristic)
}

pub fn teacher_commit(post_graph: &IdeaGraph, round: u32, t_max: u32) -> bool {
    teacher_commit_with(&CommitRule::default(), post_graph, round, t_max)
}

pub fn teacher_commit_with(rule: &CommitRule, post_graph: &IdeaGraph, round: u32, t_max: u32) -> bool {
    round >= t_max || rule.is_mature(&graph_signals(post_graph))
}

/// Generator seed derived from the run seed and the decision coordinates.
pub fn decision_seed(seed: u64, group_id: &str, round: u32, role: RoleId) -> u64 {
    let digest = sha256_hex(format!("{seed}|{group_id}|{round}|{}", role.token()).as_bytes());
    u64::from_str_radix(&digest[..16], 16).expect("hex digest")
}

pub fn random_select(slate: &Slate, seed: u64, group_id: &str) -> Decision {
    let mut rng = ChaCha8Rng::seed_from_u64(decision_seed(seed, group_id, slate.round, slate.role));
    let index = rng.gen_range(0..slate.candidates.len());
    Decision::from_slate(slate, index, 0.0, DecisionSource::Random)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditTrigger {
    /// Weak grounding under heavy contradiction load.
    GroundingRepairBoost,
    /// Mature, low-conflict graph.
    MatureDamp,
}

pub fn edit_trigger(signals: &SignalVector, cfg: &CalibrationConfig) -> Option<EditTrigger> {
    if signals.grounding < cfg.low_threshold && signals.contradiction_load > cfg.high_threshold {
        Some(EditTrigger::GroundingRepairBoost)
    } else if signals.maturity > cfg.high_threshold && signals.contradiction_load < cfg.low_threshold {
        Some(EditTrigger::MatureDamp)
    } else {
        None
    }
}

fn boosted(kind: ActionKind) -> bool {
    matches!(
        kind,
        ActionKind::AddSupportEdge
            | ActionKind::AttachEvidence
            | ActionKind::ProposeRepair
            | ActionKind::AddContradictionEdge
    )
}

pub fn calibrate_edit(scores: &[f64], signals: &SignalVector, slate: &Slate, cfg: &CalibrationConfig) -> Vec<f64> {
    let Some(trigger) = edit_trigger(signals, cfg) else {
        return scores.to_vec();
    };
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
    let span = if scores.is_empty() { 1.0 } else { (hi - lo).max(1.0) };
    let cap = cfg.bias_cap * span;
    scores
        .iter()
        .zip(&slate.candidates)
        .map(|(s, c)| {
            let adjustment = match trigger {
                EditTrigger::GroundingRepairBoost if boosted(c.kind) => cap,
                EditTrigger::MatureDamp if c.kind != ActionKind::Skip => -cap,
                _ => 0.0,
            };
            s + adjustment.clamp(-cap, cap)
        })
        .collect()
}

pub fn calibrate_commit(score: f64, signals: &SignalVector, cfg: &CalibrationConfig) -> f64 {
    let mut shift = 0.0;
    if signals.maturity > cfg.high_threshold && signals.contradiction_load < cfg.low_threshold {
        shift += cfg.commit_threshold_shift;
    }
    if signals.grounding < cfg.low_threshold || signals.contradiction_load > cfg.high_threshold {
        shift -= cfg.commit_threshold_shift;
    }
    (score + shift).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafeguardReason {
    Unmaterializable,
    LowGainKindSwap,
    DistinctTarget,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SafeguardOutcome {
    pub decision: Decision,
    pub reason: Option<SafeguardReason>,
}

pub fn apply_safeguards(
    learned: &Decision,
    heuristic: &Decision,
    slate: &Slate,
    snapshot: &Snapshot,
) -> SafeguardOutcome {
    let fallback = |reason| SafeguardOutcome {
        decision: heuristic.clone(),
        reason: Some(reason),
    };
    let in_slate = slate.candidates.get(learned.candidate_index) == Some(&learned.candidate);
    let realizable = in_slate
        && materialize_decision(
            snapshot,
            &learned.candidate.to_action(learned.role, slate.round, learned.source),
        )
        .is_ok();
    if !realizable {
        return fallback(SafeguardReason::Unmaterializable);
    }
    if learned.candidate.kind != heuristic.candidate.kind {
        let pre = graph_signals(snapshot.graph());
        let learned_score = teacher_score_from(snapshot, &pre, &learned.candidate);
        let heuristic_score = teacher_score_from(snapshot, &pre, &heuristic.candidate);
        if learned_score < heuristic_score - LOW_GAIN_SWAP_MARGIN {
            return fallback(SafeguardReason::LowGainKindSwap);
        }
    }
    SafeguardOutcome {
        decision: learned.clone(),
        reason: None,
    }
}

/// One role's teacher selection together with its per-candidate scores.
#[derive(Clone, Debug)]
pub struct TeacherChoice<'a> {
    pub slate: &'a Slate,
    pub scores: Vec<f64>,
    pub selected: usize,
}

/// Steers same-round teacher selections away from shared targets.
///
/// Choices must be in canonical role order. A role whose pick overlaps an
/// earlier role's targets switches to the best non-skip candidate that
/// overlaps nothing already chosen and scores within [`DIVERSITY_TOLERANCE`].
/// Returns `(position, previous index)` for every switch.
pub fn diversify(choices: &mut [TeacherChoice<'_>]) -> Vec<(usize, usize)> {
    let mut taken: Vec<String> = Vec::new();
    let mut switches = Vec::new();
    for (pos, choice) in choices.iter_mut().enumerate() {
        let overlaps = |c: &Candidate| c.targets.iter().any(|t| taken.contains(t));
        let picked = &choice.slate.candidates[choice.selected];
        if picked.kind != ActionKind::Skip && overlaps(picked) {
            let floor = choice.scores[choice.selected] - DIVERSITY_TOLERANCE;
            let alternative = choice
                .slate
                .candidates
                .iter()
                .enumerate()
                .filter(|(i, c)| {
                    c.kind != ActionKind::Skip && !overlaps(c) && choice.scores[*i] >= floor
                })
                .fold(None::<usize>, |best, (i, _)| match best {
                    Some(b) if choice.scores[b] >= choice.scores[i] => Some(b),
                    _ => Some(i),
                });
            if let Some(i) = alternative {
                switches.push((pos, choice.selected));
                choice.selected = i;
            }
        }
        taken.extend(choice.slate.candidates[choice.selected].targets.iter().cloned());
    }
    switches
}
