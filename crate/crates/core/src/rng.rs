//! Counter-based random streams.
//!
//! A master seed is expanded once into a ChaCha8 key; trial `t` reads the
//! keystream with stream id `t`. Two trials never share keystream blocks and
//! any trial can be regenerated in isolation, which is what makes parallel
//! runs bit-identical to serial ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream handed to a single trial.
pub type TrialRng = ChaCha8Rng;

/// Factory for per-trial random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStreams {
    key: [u8; 32],
    seed: u64,
}

impl TrialStreams {
    pub fn new(seed: u64) -> Self {
        let key = ChaCha8Rng::seed_from_u64(seed).get_seed();
        Self { key, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for trial `index`.
    pub fn stream(&self, index: u64) -> TrialRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}
