//! Named random streams derived from one master seed.
//!
//! Each consumer draws from its own ChaCha stream, so switching the model
//! variant (or anything else that changes how many numbers one consumer
//! draws) never shifts another consumer's sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Weights,
    RealData,
    Latent,
    Evaluation,
    Search,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Weights => 1,
            Stream::RealData => 2,
            Stream::Latent => 3,
            Stream::Evaluation => 4,
            Stream::Search => 5,
        }
    }
}

pub fn stream(master_seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(which.id());
    rng
}

/// A stream keyed by an extra integer, e.g. the step at which an evaluation runs.
pub fn keyed_stream(master_seed: u64, which: Stream, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(which.id() | (1 << 32));
    rng
}

/// Exact position of a ChaCha generator, for checkpointing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    /// 128-bit word position as a decimal string (JSON numbers cannot hold it).
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Option<ChaCha8Rng> {
        let pos: u128 = self.word_pos.parse().ok()?;
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(pos);
        Some(rng)
    }
}
