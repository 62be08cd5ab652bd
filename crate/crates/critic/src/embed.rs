//! Text embedders producing fixed-width sentence vectors.

use sha2::{Digest, Sha256};

use crate::error::{CriticError, Result};
use crate::layout::TEXT_DIM;

pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize {
        TEXT_DIM
    }

    fn encode(&self, text: &str) -> Result<Vec<f64>>;
}

/// Deterministic bag-of-tokens embedder: each token hashes to a pseudo-random
/// direction, and the sum is scaled to unit norm.
#[derive(Clone, Copy, Debug, Default)]
pub struct HashEmbedder;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn token_direction(token: &str, out: &mut [f64]) {
    let digest = Sha256::digest(token.as_bytes());
    let mut state = u64::from_le_bytes(digest[..8].try_into().expect("eight bytes"));
    for v in out.iter_mut() {
        let bits = splitmix(&mut state) >> 11;
        *v += bits as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
    }
}

impl Embedder for HashEmbedder {
    fn encode(&self, text: &str) -> Result<Vec<f64>> {
        let mut v = vec![0.0; TEXT_DIM];
        let lowered = text.to_lowercase();
        let mut tokens = lowered
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .peekable();
        if tokens.peek().is_none() {
            token_direction("", &mut v);
        }
        for t in tokens {
            token_direction(t, &mut v);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(v)
    }
}

/// Checks an embedder's output width.
pub fn encode_checked(embedder: &dyn Embedder, text: &str) -> Result<Vec<f64>> {
    let v = embedder.encode(text)?;
    if v.len() != TEXT_DIM {
        return Err(CriticError::EmbeddingDimension {
            expected: TEXT_DIM,
            got: v.len(),
        });
    }
    Ok(v)
}
