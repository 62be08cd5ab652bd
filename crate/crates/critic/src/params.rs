use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::layout::{Block, BlockRole, Layout};

/// Standard deviation of embedding-table initialization.
pub const EMBED_INIT_STD: f64 = 0.02;

/// Every critic weight, stored flat in [`Layout`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticParams {
    pub data: Vec<f64>,
}

impl CriticParams {
    pub fn zeros() -> Self {
        CriticParams {
            data: vec![0.0; Layout::get().len],
        }
    }

    pub fn init(seed: u64) -> Self {
        let layout = Layout::get();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, EMBED_INIT_STD).expect("valid deviation");
        let mut data = vec![0.0; layout.len];
        for (_, block) in layout.blocks() {
            let slot = &mut data[block.range()];
            match block.role {
                BlockRole::Embedding => slot.iter_mut().for_each(|w| *w = normal.sample(&mut rng)),
                BlockRole::Matrix => {
                    let bound = (6.0 / (block.cols + block.rows) as f64).sqrt();
                    slot.iter_mut().for_each(|w| *w = rng.gen_range(-bound..=bound));
                }
                BlockRole::Bias => {}
                BlockRole::Gain => slot.fill(1.0),
            }
        }
        CriticParams { data }
    }

    pub fn block(&self, b: Block) -> &[f64] {
        &self.data[b.range()]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|w| w.is_finite())
    }

    /// SHA-256 over the little-endian bytes of every weight.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for w in &self.data {
            h.update(w.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}
