//! Central finite-difference verification of the analytic gradients.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use eig_core::graph::{EdgeInsert, Evidence, NodeInsert};
use eig_core::slates::build_slate;
use eig_core::{freeze_snapshot, graph_signals, EdgeKind, IdeaGraph, NodeKind, Provenance, RoleId};

use crate::embed::Embedder;
use crate::error::Result;
use crate::features::{candidate_input, commit_features, featurize};
use crate::layout::Layout;
use crate::loss::{
    commit_objective, listwise_loss, slate_objective, weighted_bce, CommitSample, SlateSample, COMMIT_POSITIVE_WEIGHT,
};
use crate::model::{commit_forward, edit_forward, encode};
use crate::params::CriticParams;

pub const MIN_CHECKED_PARAMETERS: usize = 200;
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Denominator floor of the relative error, so vanishing gradients compare absolutely.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-3;
const MAX_RESAMPLES: usize = 50;

/// A small graph carrying one slate and one commit state, exercising both heads.
#[derive(Clone, Debug)]
pub struct GradInstance {
    pub slate: SlateSample,
    pub commit: CommitSample,
}

const WORDS: &[&str] = &[
    "graph", "routing", "sparse", "latency", "memory", "evidence", "protein", "robust", "benchmark", "energy",
];

impl GradInstance {
    /// Random instance with at most `max_nodes` nodes; `with_edges = false` gives an edgeless graph.
    pub fn random(seed: u64, max_nodes: usize, with_edges: bool, embedder: &dyn Embedder) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = IdeaGraph::new(format!("gradcheck-{seed}"));
        let n = rng.gen_range(3..=max_nodes.max(3));
        let mut ids = Vec::new();
        for i in 0..n {
            let kind = if i < 4 {
                NodeKind::SLOTS[i]
            } else {
                *NodeKind::ALL.choose(&mut rng).expect("non-empty")
            };
            let words: Vec<&str> = (0..rng.gen_range(2..5)).map(|_| *WORDS.choose(&mut rng).expect("non-empty")).collect();
            let evidence = (0..rng.gen_range(0..3))
                .map(|k| Evidence {
                    source: format!("ref{k}"),
                    snippet: words.join(" "),
                })
                .collect();
            ids.push(g.insert_node(NodeInsert {
                kind,
                text: words.join(" "),
                role: rng.gen_bool(0.8).then(|| *RoleId::ALL.choose(&mut rng).expect("non-empty")),
                branch: "init".into(),
                confidence: rng.gen_range(0.0..=1.0),
                evidence,
                provenance: Provenance::Agent,
            }));
        }
        if with_edges {
            for _ in 0..rng.gen_range(n..2 * n) {
                let (a, b) = (ids.choose(&mut rng).expect("ids"), ids.choose(&mut rng).expect("ids"));
                if a == b {
                    continue;
                }
                let kind = *EdgeKind::ALL.choose(&mut rng).expect("non-empty");
                if let Ok(Some(e)) = g.insert_edge(EdgeInsert {
                    src: a.clone(),
                    dst: b.clone(),
                    kind,
                    role: None,
                    branch: "init".into(),
                    evidence_ref: None,
                    note: None,
                }) {
                    let edge = g.edges.get_mut(&e).expect("inserted");
                    edge.resolved = kind == EdgeKind::Contradicts && rng.gen_bool(0.5);
                    edge.active = rng.gen_bool(0.9);
                }
            }
        }
        let snap = freeze_snapshot(&g);
        let role = *RoleId::ALL.choose(&mut rng).expect("non-empty");
        let (slate, _) = build_slate(&snap, role, 2, &[]);
        let batch = featurize(&g, embedder)?;
        let candidates = slate
            .candidates
            .iter()
            .map(|c| candidate_input(&g, &batch, c, embedder))
            .collect::<Result<Vec<_>>>()?;
        let positive = rng.gen_range(0..candidates.len());
        let features = commit_features(&graph_signals(&g));
        Ok(GradInstance {
            slate: SlateSample {
                batch: batch.clone(),
                candidates,
                positive,
            },
            commit: CommitSample {
                batch,
                features,
                label: rng.gen_bool(0.5),
            },
        })
    }

    /// Joint objective L_edit + L_commit; accumulates its gradient when asked.
    pub fn objective(&self, params: &CriticParams, grad: Option<&mut [f64]>) -> Result<f64> {
        match grad {
            Some(g) => {
                let edit = slate_objective(params, &self.slate, Some((&mut *g, 1.0)))?.0;
                let commit = commit_objective(params, &self.commit, COMMIT_POSITIVE_WEIGHT, Some((g, 1.0)))?.0;
                Ok(edit + commit)
            }
            None => Ok(self.evaluate(params)?.0),
        }
    }

    /// Joint objective together with a fingerprint of every ReLU activation pattern.
    pub fn evaluate(&self, params: &CriticParams) -> Result<(f64, u64)> {
        let slate_enc = encode(params, &self.slate.batch)?;
        let mut sig = slate_enc.relu_signature();
        let mut scores = Vec::with_capacity(self.slate.candidates.len());
        for c in &self.slate.candidates {
            let h = edit_forward(params, &slate_enc, &self.slate.batch.state_text, c);
            sig = sig.rotate_left(7) ^ h.relu_signature();
            scores.push(h.output);
        }
        let (edit, _) = listwise_loss(&scores, self.slate.positive);
        let commit_enc = if self.commit.batch == self.slate.batch {
            slate_enc
        } else {
            encode(params, &self.commit.batch)?
        };
        let h = commit_forward(params, &commit_enc, &self.commit.batch.state_text, &self.commit.features);
        let (commit, _) = weighted_bce(h.output, self.commit.label, COMMIT_POSITIVE_WEIGHT);
        sig = sig.rotate_left(7) ^ commit_enc.relu_signature() ^ h.relu_signature().rotate_left(13);
        Ok((edit + commit, sig))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub checked: usize,
    pub resampled: usize,
    /// Block name and index of the worst parameter.
    pub worst: Option<(String, usize)>,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Compares analytic and central-difference gradients on a stratified sample of
/// at least [`MIN_CHECKED_PARAMETERS`] parameters. Parameters whose perturbation
/// flips a ReLU are resampled.
pub fn grad_check(params: &CriticParams, instance: &GradInstance, epsilon: f64, seed: u64) -> Result<GradCheckReport> {
    let layout = Layout::get();
    let mut analytic = vec![0.0; params.data.len()];
    instance.objective(params, Some(&mut analytic))?;
    let base_signature = instance.evaluate(params)?.1;

    let blocks = layout.blocks();
    let per_block = MIN_CHECKED_PARAMETERS.div_ceil(blocks.len());
    let mut quota: Vec<usize> = blocks.iter().map(|(_, b)| per_block.min(b.len())).collect();
    let mut shortfall = MIN_CHECKED_PARAMETERS.saturating_sub(quota.iter().sum());
    for (q, (_, b)) in quota.iter_mut().zip(blocks).rev() {
        let extra = shortfall.min(b.len() - *q);
        *q += extra;
        shortfall -= extra;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe = params.clone();
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        checked: 0,
        resampled: 0,
        worst: None,
    };
    for ((name, block), want) in blocks.iter().zip(quota) {
        let mut done = 0;
        let mut attempts = 0;
        while done < want && attempts < want + MAX_RESAMPLES {
            attempts += 1;
            let i = block.offset + rng.gen_range(0..block.len());
            let original = probe.data[i];
            probe.data[i] = original + epsilon;
            let (plus, plus_sig) = instance.evaluate(&probe)?;
            probe.data[i] = original - epsilon;
            let (minus, minus_sig) = instance.evaluate(&probe)?;
            probe.data[i] = original;
            if plus_sig != base_signature || minus_sig != base_signature {
                report.resampled += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * epsilon);
            let err = relative_error(analytic[i], numeric);
            if report.worst.is_none() || err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst = Some((name.clone(), i - block.offset));
            }
            report.checked += 1;
            done += 1;
        }
    }
    Ok(report)
}
