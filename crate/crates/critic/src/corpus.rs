//! Curated supervision rows and their conversion into training samples.

use serde::{Deserialize, Serialize};

use eig_core::canonical::deserialize_str;
use eig_core::slates::Candidate;
use eig_core::{graph_signals, RoleId};

use crate::embed::Embedder;
use crate::error::{CriticError, Result};
use crate::features::{candidate_input, commit_features, featurize};
use crate::layout::COMMIT_FEATURES;
use crate::loss::{CommitSample, SlateSample};

/// One teacher-labeled slate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditExample {
    pub group_id: String,
    pub episode_id: String,
    pub round: u32,
    pub role: RoleId,
    /// Canonical serialization of the frozen snapshot.
    pub snapshot: String,
    pub snapshot_hash: String,
    /// Candidates in canonical slate order.
    pub candidates: Vec<Candidate>,
    /// One flag per candidate; exactly one must be set.
    pub labels: Vec<u8>,
}

impl EditExample {
    pub fn positive_index(&self) -> std::result::Result<usize, String> {
        if self.labels.len() != self.candidates.len() {
            return Err(format!(
                "{} labels for {} candidates",
                self.labels.len(),
                self.candidates.len()
            ));
        }
        let positives: Vec<usize> = (0..self.labels.len()).filter(|&i| self.labels[i] != 0).collect();
        match positives.as_slice() {
            [one] => Ok(*one),
            [] => Err("slate has no positive".into()),
            many => Err(format!("slate has {} positives", many.len())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommitLabel {
    Continue,
    Commit,
}

/// One post-round state with its continue-or-commit label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommitExample {
    pub group_id: String,
    pub episode_id: String,
    pub round: u32,
    /// Canonical serialization of the realized post-round graph.
    pub graph: String,
    pub features: [f64; COMMIT_FEATURES],
    pub label: CommitLabel,
}

fn row_error(row: usize, group_id: &str, reason: impl Into<String>) -> CriticError {
    CriticError::CorpusRow {
        row,
        group_id: group_id.to_string(),
        reason: reason.into(),
    }
}

pub fn prepare_edit_corpus(rows: &[EditExample], embedder: &dyn Embedder) -> Result<Vec<SlateSample>> {
    rows.iter()
        .enumerate()
        .map(|(row, ex)| {
            let positive = ex.positive_index().map_err(|r| row_error(row, &ex.group_id, r))?;
            let graph = deserialize_str(&ex.snapshot).map_err(|e| row_error(row, &ex.group_id, e.to_string()))?;
            let batch = featurize(&graph, embedder)?;
            let candidates = ex
                .candidates
                .iter()
                .map(|c| candidate_input(&graph, &batch, c, embedder))
                .collect::<Result<Vec<_>>>()?;
            Ok(SlateSample {
                batch,
                candidates,
                positive,
            })
        })
        .collect()
}

pub fn prepare_commit_corpus(rows: &[CommitExample], embedder: &dyn Embedder) -> Result<Vec<CommitSample>> {
    rows.iter()
        .enumerate()
        .map(|(row, ex)| {
            let graph = deserialize_str(&ex.graph).map_err(|e| row_error(row, &ex.group_id, e.to_string()))?;
            if ex.features.iter().any(|f| !f.is_finite()) {
                return Err(row_error(row, &ex.group_id, "non-finite feature"));
            }
            Ok(CommitSample {
                batch: featurize(&graph, embedder)?,
                features: ex.features,
                label: ex.label == CommitLabel::Commit,
            })
        })
        .collect()
}

/// Commit features recomputed from a serialized graph.
pub fn features_of(graph_text: &str) -> Result<[f64; COMMIT_FEATURES]> {
    let graph = deserialize_str(graph_text)?;
    Ok(commit_features(&graph_signals(&graph)))
}
