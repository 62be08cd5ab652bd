use serde_json::json;

use eig_critic::error::{CriticError, Result};
use eig_critic::layout::TEXT_DIM;
use eig_critic::Embedder;

use crate::backend::ChatClient;

/// Embedding client for `{endpoint}/embeddings`, sharing the chat client's
/// timeout and retry policy.
#[derive(Debug)]
pub struct RemoteEmbedder {
    client: ChatClient,
}

impl RemoteEmbedder {
    pub fn new(client: ChatClient) -> Self {
        RemoteEmbedder { client }
    }
}

impl Embedder for RemoteEmbedder {
    fn encode(&self, text: &str) -> Result<Vec<f64>> {
        let body = json!({"model": self.client.config().model, "input": text}).to_string();
        let (v, _) = self
            .client
            .post("embeddings", body.into_bytes(), |v| {
                v.pointer("/data/0/embedding")?
                    .as_array()?
                    .iter()
                    .map(|x| x.as_f64())
                    .collect::<Option<Vec<f64>>>()
            })
            .map_err(|e| CriticError::Embedder(e.to_string()))?;
        if v.len() != TEXT_DIM {
            return Err(CriticError::EmbeddingDimension {
                expected: TEXT_DIM,
                got: v.len(),
            });
        }
        Ok(v)
    }
}
