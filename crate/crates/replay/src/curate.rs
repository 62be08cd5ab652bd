//! Weak-label curation: teacher decisions become edit rows, post-round graphs
//! become commit rows. Invalid or low-gain rows are reported, never fatal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use eig_core::canonical::sha256_hex;
use eig_core::{DecisionSource, RoleId};
use eig_critic::corpus::{features_of, CommitExample, CommitLabel, EditExample};

use crate::record::{CommitEval, DecisionRecord, MergeRecord, RecordBody, RoundStart, SlateRecord};
use crate::trace::Trace;

/// Teacher-score margin over skip below which an edit row is dropped.
pub const LOW_GAIN_MARGIN: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurateConfig {
    pub low_gain_margin: f64,
}

impl Default for CurateConfig {
    fn default() -> Self {
        CurateConfig {
            low_gain_margin: LOW_GAIN_MARGIN,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    MissingSnapshot,
    SnapshotMismatch,
    MissingSlate,
    NotTeacherDecision,
    IndexOutOfRange,
    MultiplePositives,
    LowGain,
    MissingRoundRecord,
    UnparseableGraph,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub stream: String,
    pub episode_id: String,
    pub group_id: String,
    pub round: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<RoleId>,
    pub reason: RejectReason,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Curated {
    pub edit: Vec<EditExample>,
    pub commit: Vec<CommitExample>,
    pub rejections: Vec<Rejection>,
}

impl Curated {
    /// Rejection counts keyed by reason.
    pub fn summary(&self) -> BTreeMap<RejectReason, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rejections {
            *out.entry(r.reason).or_insert(0) += 1;
        }
        out
    }
}

#[derive(Default)]
struct RoundView<'a> {
    start: Option<&'a RoundStart>,
    slates: Vec<&'a SlateRecord>,
    decisions: Vec<&'a DecisionRecord>,
    merge: Option<&'a MergeRecord>,
    commit_eval: Option<&'a CommitEval>,
}

fn rounds(trace: &Trace) -> BTreeMap<u32, RoundView<'_>> {
    let mut out: BTreeMap<u32, RoundView<'_>> = BTreeMap::new();
    for r in trace.records() {
        if r.round == 0 {
            continue;
        }
        let view = out.entry(r.round).or_default();
        match &r.body {
            RecordBody::RoundStart(s) => view.start = Some(s),
            RecordBody::Slate(s) => view.slates.push(s),
            RecordBody::Decision(d) => view.decisions.push(d),
            RecordBody::Merge(m) => view.merge = Some(m),
            RecordBody::CommitEval(c) => view.commit_eval = Some(c),
            _ => {}
        }
    }
    out
}

pub fn curate_labels(traces: &[Trace], cfg: &CurateConfig) -> Curated {
    let mut out = Curated::default();
    for trace in traces {
        let episode_id = trace.episode_id().unwrap_or_default().to_string();
        let group_id = trace.group_id().unwrap_or_default().to_string();
        let mut rejected = Vec::new();
        for (round, view) in rounds(trace) {
            let mut reject = |stream: &str, role: Option<RoleId>, reason: RejectReason, detail: String| {
                rejected.push(Rejection {
                    stream: stream.into(),
                    episode_id: episode_id.clone(),
                    group_id: group_id.clone(),
                    round,
                    role,
                    reason,
                    detail,
                })
            };
            let mut per_slate: BTreeMap<&str, Vec<&DecisionRecord>> = BTreeMap::new();
            for d in &view.decisions {
                per_slate.entry(d.slate_hash.as_str()).or_default().push(d);
            }
            let mut edits = Vec::new();
            for (hash, decisions) in per_slate {
                let role = decisions[0].role;
                let Some(slate) = view.slates.iter().find(|s| s.slate_hash == hash) else {
                    reject("edit", Some(role), RejectReason::MissingSlate, hash.to_string());
                    continue;
                };
                if decisions.len() > 1 {
                    reject(
                        "edit",
                        Some(role),
                        RejectReason::MultiplePositives,
                        format!("{} decisions reference slate {hash}", decisions.len()),
                    );
                    continue;
                }
                let d = decisions[0];
                let Some(start) = view.start else {
                    reject("edit", Some(role), RejectReason::MissingSnapshot, "no round_start record".into());
                    continue;
                };
                if sha256_hex(start.snapshot.as_bytes()) != slate.slate.snapshot_hash
                    || start.snapshot_hash != slate.slate.snapshot_hash
                {
                    reject(
                        "edit",
                        Some(role),
                        RejectReason::SnapshotMismatch,
                        format!("slate snapshot {}", slate.slate.snapshot_hash),
                    );
                    continue;
                }
                if d.source != DecisionSource::Heuristic {
                    reject("edit", Some(role), RejectReason::NotTeacherDecision, d.source.to_string());
                    continue;
                }
                let n = slate.slate.candidates.len();
                if d.candidate_index >= n || d.teacher_scores.len() != n || slate.slate.candidates[d.candidate_index] != d.candidate
                {
                    reject(
                        "edit",
                        Some(role),
                        RejectReason::IndexOutOfRange,
                        format!("index {} of {n} candidates", d.candidate_index),
                    );
                    continue;
                }
                let skip = slate.slate.skip_index();
                let margin = d.teacher_scores[d.candidate_index] - d.teacher_scores[skip];
                if margin < cfg.low_gain_margin {
                    reject("edit", Some(role), RejectReason::LowGain, format!("margin over skip {margin:.6}"));
                    continue;
                }
                let mut labels = vec![0u8; n];
                labels[d.candidate_index] = 1;
                edits.push(EditExample {
                    group_id: group_id.clone(),
                    episode_id: episode_id.clone(),
                    round,
                    role,
                    snapshot: start.snapshot.clone(),
                    snapshot_hash: start.snapshot_hash.clone(),
                    candidates: slate.slate.candidates.clone(),
                    labels,
                });
            }
            edits.sort_by_key(|e| e.role);
            out.edit.extend(edits);

            let (Some(merge), Some(eval)) = (view.merge, view.commit_eval) else {
                reject("commit", None, RejectReason::MissingRoundRecord, "merge or commit_eval absent".into());
                continue;
            };
            let features = match features_of(&merge.graph) {
                Ok(f) => f,
                Err(e) => {
                    reject("commit", None, RejectReason::UnparseableGraph, e.to_string());
                    continue;
                }
            };
            out.commit.push(CommitExample {
                group_id: group_id.clone(),
                episode_id: episode_id.clone(),
                round,
                graph: merge.graph.clone(),
                features,
                label: if eval.teacher_label {
                    CommitLabel::Commit
                } else {
                    CommitLabel::Continue
                },
            });
        }
        out.rejections.append(&mut rejected);
    }
    out
}

/// Writes rows as sorted-key JSON lines.
pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&eig_core::canonical::canonical_json(r));
        out.push('\n');
    }
    out
}

pub fn from_jsonl<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> crate::Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| crate::ReplayError::Line {
                path: origin.to_string(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}
