//! Joint training of both heads with decoupled weight decay.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use eig_core::control::argmax;

use crate::metrics::CommitConfusion;
use crate::error::Result;
use crate::loss::{commit_objective, slate_objective, CommitSample, SlateSample, COMMIT_POSITIVE_WEIGHT};
use crate::params::CriticParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub positive_weight: f64,
    /// Multiplier on the commit loss in the joint objective.
    pub commit_weight: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            weight_decay: 0.01,
            batch_size: 16,
            epochs: 8,
            positive_weight: COMMIT_POSITIVE_WEIGHT,
            commit_weight: 1.0,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub edit_loss: f64,
    pub commit_loss: f64,
    pub dev_slate_accuracy: f64,
    pub dev_commit_precision: f64,
    pub dev_commit_recall: f64,
    pub dev_commit_accuracy: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct TrainData<'a> {
    pub edit_train: &'a [SlateSample],
    pub edit_dev: &'a [SlateSample],
    pub commit_train: &'a [CommitSample],
    pub commit_dev: &'a [CommitSample],
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: CriticParams,
    pub metrics: Vec<EpochMetrics>,
}

struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl AdamW {
    fn new(len: usize) -> Self {
        AdamW {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
        self.step += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.step);
        let c2 = 1.0 - cfg.beta2.powi(self.step);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g;
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g * g;
            let update = (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + cfg.adam_eps);
            params[i] -= cfg.learning_rate * (update + cfg.weight_decay * params[i]);
        }
    }
}

enum Step<'a> {
    Edit(Vec<&'a SlateSample>),
    Commit(Vec<&'a CommitSample>),
}

fn schedule<'a>(data: &TrainData<'a>, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Vec<Step<'a>> {
    let mut edit: Vec<&SlateSample> = data.edit_train.iter().collect();
    let mut commit: Vec<&CommitSample> = data.commit_train.iter().collect();
    edit.shuffle(rng);
    commit.shuffle(rng);
    let size = cfg.batch_size.max(1);
    let mut edit_batches = edit.chunks(size).map(|c| c.to_vec());
    let mut commit_batches = commit.chunks(size).map(|c| c.to_vec());
    let mut steps = Vec::new();
    loop {
        let e = edit_batches.next().map(Step::Edit);
        let c = commit_batches.next().map(Step::Commit);
        if e.is_none() && c.is_none() {
            return steps;
        }
        steps.extend(e);
        steps.extend(c);
    }
}

/// Dev-set slate accuracy (argmax equals the positive).
pub fn slate_accuracy(params: &CriticParams, dev: &[SlateSample]) -> Result<f64> {
    if dev.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0;
    for s in dev {
        let (_, scores) = slate_objective(params, s, None)?;
        hits += usize::from(argmax(&scores) == s.positive);
    }
    Ok(hits as f64 / dev.len() as f64)
}

pub fn commit_confusion(params: &CriticParams, dev: &[CommitSample], positive_weight: f64) -> Result<CommitConfusion> {
    let mut c = CommitConfusion::default();
    for s in dev {
        let (_, p) = commit_objective(params, s, positive_weight, None)?;
        c.record(p >= 0.5, s.label);
    }
    Ok(c)
}

pub fn train(data: TrainData<'_>, cfg: &TrainConfig, init: CriticParams) -> Result<TrainOutcome> {
    let mut params = init;
    let mut opt = AdamW::new(params.data.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut metrics = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let (mut edit_loss, mut commit_loss) = (0.0, 0.0);
        for step in schedule(&data, cfg, &mut rng) {
            let mut grad = vec![0.0; params.data.len()];
            match step {
                Step::Edit(batch) => {
                    let scale = 1.0 / batch.len() as f64;
                    for s in batch {
                        edit_loss += slate_objective(&params, s, Some((&mut grad, scale)))?.0;
                    }
                }
                Step::Commit(batch) => {
                    let scale = cfg.commit_weight / batch.len() as f64;
                    for s in batch {
                        commit_loss += commit_objective(&params, s, cfg.positive_weight, Some((&mut grad, scale)))?.0;
                    }
                }
            }
            opt.update(&mut params.data, &grad, cfg);
        }
        let confusion = commit_confusion(&params, data.commit_dev, cfg.positive_weight)?;
        metrics.push(EpochMetrics {
            epoch,
            edit_loss: edit_loss / data.edit_train.len().max(1) as f64,
            commit_loss: commit_loss / data.commit_train.len().max(1) as f64,
            dev_slate_accuracy: slate_accuracy(&params, data.edit_dev)?,
            dev_commit_precision: confusion.precision(),
            dev_commit_recall: confusion.recall(),
            dev_commit_accuracy: confusion.accuracy(),
        });
    }
    Ok(TrainOutcome { params, metrics })
}
