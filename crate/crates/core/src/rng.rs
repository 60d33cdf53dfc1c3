//! Counter-based random streams.
//!
//! A run owns one master seed. Every draw made by agent `i` in round `k` for
//! a given purpose comes from a ChaCha stream positioned purely by
//! `(seed, agent, purpose, round)`, so trajectories do not depend on the
//! order in which agents are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a draw is used for. Each purpose gets its own stream per agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Inner-correction sample `φ'`.
    Inner = 0,
    /// Gradient sample `(φ, ζ)`.
    Gradient = 1,
    /// Anything the problem family needs beyond the two above.
    Auxiliary = 2,
}

const PURPOSES: u64 = 4;
/// Words reserved for one (agent, purpose, round) cell: 2^32 u32 outputs.
const ROUND_STRIDE: u128 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, agent: usize, purpose: Purpose, round: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(agent as u64 * PURPOSES + purpose as u64);
        rng.set_word_pos(round as u128 * ROUND_STRIDE);
        rng
    }

    pub fn inner(&self, agent: usize, round: usize) -> ChaCha8Rng {
        self.stream(agent, Purpose::Inner, round)
    }

    pub fn gradient(&self, agent: usize, round: usize) -> ChaCha8Rng {
        self.stream(agent, Purpose::Gradient, round)
    }
}
