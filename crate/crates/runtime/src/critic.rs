//! The learned controller's critic and its per-episode encoder cache.

use std::sync::Arc;

use eig_core::slates::Slate;
use eig_core::{IdeaGraph, SignalVector};
use eig_critic::model::{commit_forward, edit_forward, sigmoid, Encoding};
use eig_critic::{candidate_input, commit_features, encode, featurize, CriticParams, Embedder, GraphBatchInput};

use crate::error::Result;

pub struct LearnedCritic {
    pub params: CriticParams,
    pub embedder: Arc<dyn Embedder>,
}

/// Node states of one graph, keyed by its canonical hash.
#[derive(Clone, Debug)]
pub struct EncodedGraph {
    pub hash: String,
    pub batch: GraphBatchInput,
    pub encoding: Encoding,
}

impl LearnedCritic {
    pub fn new(params: CriticParams, embedder: Arc<dyn Embedder>) -> Self {
        LearnedCritic { params, embedder }
    }

    pub fn encode(&self, graph: &IdeaGraph, hash: &str) -> Result<EncodedGraph> {
        let batch = featurize(graph, self.embedder.as_ref())?;
        let encoding = encode(&self.params, &batch)?;
        Ok(EncodedGraph {
            hash: hash.to_string(),
            batch,
            encoding,
        })
    }

    /// Raw edit scores of every slate candidate against the cached state.
    pub fn edit_scores(&self, graph: &IdeaGraph, encoded: &EncodedGraph, slate: &Slate) -> Result<Vec<f64>> {
        slate
            .candidates
            .iter()
            .map(|c| {
                let input = candidate_input(graph, &encoded.batch, c, self.embedder.as_ref())?;
                Ok(edit_forward(&self.params, &encoded.encoding, &encoded.batch.state_text, &input).output)
            })
            .collect()
    }

    /// Logistic commit score of a post-round graph.
    pub fn commit_score(&self, encoded: &EncodedGraph, signals: &SignalVector) -> f64 {
        let f = commit_features(signals);
        sigmoid(commit_forward(&self.params, &encoded.encoding, &encoded.batch.state_text, &f).output)
    }
}

/// Holds the most recent encoding so a merged graph is encoded once and
/// reused as the next round's state.
#[derive(Debug, Default)]
pub struct EncoderCache {
    last: Option<Arc<EncodedGraph>>,
    hits: usize,
    misses: usize,
}

impl EncoderCache {
    pub fn get_or_encode(&mut self, critic: &LearnedCritic, graph: &IdeaGraph, hash: &str) -> Result<Arc<EncodedGraph>> {
        if let Some(e) = self.last.as_ref().filter(|e| e.hash == hash) {
            self.hits += 1;
            return Ok(Arc::clone(e));
        }
        self.misses += 1;
        let e = Arc::new(critic.encode(graph, hash)?);
        self.last = Some(Arc::clone(&e));
        Ok(e)
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn misses(&self) -> usize {
        self.misses
    }
}
