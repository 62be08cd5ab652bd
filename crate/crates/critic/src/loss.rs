//! Training objectives over prepared samples.

use crate::error::Result;
use crate::features::{CandidateInput, GraphBatchInput};
use crate::layout::{COMMIT_FEATURES, HIDDEN};
use crate::model::{commit_backward, commit_forward, edit_backward, edit_forward, encode, encode_backward, sigmoid};
use crate::params::CriticParams;

/// Positive-class weight of the commit loss.
pub const COMMIT_POSITIVE_WEIGHT: f64 = 1.115;

/// One slate ready for the edit head, with its teacher-selected positive.
#[derive(Clone, Debug)]
pub struct SlateSample {
    pub batch: GraphBatchInput,
    pub candidates: Vec<CandidateInput>,
    pub positive: usize,
}

/// One post-round state ready for the commit head.
#[derive(Clone, Debug)]
pub struct CommitSample {
    pub batch: GraphBatchInput,
    pub features: [f64; COMMIT_FEATURES],
    pub label: bool,
}

/// Softmax cross-entropy of the positive, with its gradient on the scores.
pub fn listwise_loss(scores: &[f64], positive: usize) -> (f64, Vec<f64>) {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let loss = total.ln() + max - scores[positive];
    let grad = exps
        .iter()
        .enumerate()
        .map(|(i, e)| e / total - f64::from(u8::from(i == positive)))
        .collect();
    (loss, grad)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Class-weighted binary cross-entropy on a logit, with its derivative.
pub fn weighted_bce(logit: f64, label: bool, positive_weight: f64) -> (f64, f64) {
    let p = sigmoid(logit);
    if label {
        (positive_weight * softplus(-logit), positive_weight * (p - 1.0))
    } else {
        (softplus(logit), p)
    }
}

/// Edit loss of one slate; adds `scale`-weighted gradients into `grad` when given.
pub fn slate_objective(
    params: &CriticParams,
    sample: &SlateSample,
    grad: Option<(&mut [f64], f64)>,
) -> Result<(f64, Vec<f64>)> {
    let enc = encode(params, &sample.batch)?;
    let caches: Vec<_> = sample
        .candidates
        .iter()
        .map(|c| edit_forward(params, &enc, &sample.batch.state_text, c))
        .collect();
    let scores: Vec<f64> = caches.iter().map(|c| c.output).collect();
    let (loss, dscores) = listwise_loss(&scores, sample.positive);
    if let Some((grad, scale)) = grad {
        let mut dnodes = vec![vec![0.0; HIDDEN]; sample.batch.len()];
        for ((cand, cache), d) in sample.candidates.iter().zip(&caches).zip(&dscores) {
            edit_backward(params, &enc, cand, cache, d * scale, grad, &mut dnodes);
        }
        encode_backward(params, &sample.batch, &enc, dnodes, grad);
    }
    Ok((loss, scores))
}

/// Commit loss of one state; returns the loss and the commit probability.
pub fn commit_objective(
    params: &CriticParams,
    sample: &CommitSample,
    positive_weight: f64,
    grad: Option<(&mut [f64], f64)>,
) -> Result<(f64, f64)> {
    let enc = encode(params, &sample.batch)?;
    let cache = commit_forward(params, &enc, &sample.batch.state_text, &sample.features);
    let (loss, dlogit) = weighted_bce(cache.output, sample.label, positive_weight);
    if let Some((grad, scale)) = grad {
        let mut dnodes = vec![vec![0.0; HIDDEN]; sample.batch.len()];
        commit_backward(params, &enc, &cache, dlogit * scale, grad, &mut dnodes);
        encode_backward(params, &sample.batch, &enc, dnodes, grad);
    }
    Ok((loss, sigmoid(cache.output)))
}
