//! Counter-based random streams keyed by `(seed, run, phase, temperature)`.
//!
//! Every sample is a pure function of its key and replicate index, so the
//! values an oracle round produces do not depend on how its work is split
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Which consumer a batch of samples belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    NoisyFind,
    Product,
    /// PPE samples `X_ij ~ π_{β_i}`.
    PairedLow,
    /// PPE samples `Y_ij ~ π_{β_{i+1}}`.
    PairedHigh,
}

impl Phase {
    fn code(self) -> u64 {
        match self {
            Phase::NoisyFind => 1,
            Phase::Product => 2,
            Phase::PairedLow => 3,
            Phase::PairedHigh => 4,
        }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a fresh 64-bit seed from a parent seed and a label.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ label.wrapping_mul(0xD605_BBB5_8C8A_BB3D))
}

/// The streams of one `(seed, run, phase, temperature_index)` key.
#[derive(Debug, Clone)]
pub struct ReplicateStreams {
    key: [u8; 32],
}

impl ReplicateStreams {
    pub fn new(seed: u64, run: u32, phase: Phase, temperature_index: usize) -> Self {
        let mut state = splitmix64(seed);
        for part in [run as u64, phase.code(), temperature_index as u64] {
            state = splitmix64(state ^ splitmix64(part.wrapping_add(0x2545_F491_4F6C_DD1D)));
        }
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            state = splitmix64(state.wrapping_add(i as u64));
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self { key }
    }

    /// Generator positioned at replicate `first`, for consumers that use
    /// exactly `words_per_replicate` 32-bit words per replicate.
    pub fn sequential(&self, first: u64, words_per_replicate: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(0);
        rng.set_word_pos(first as u128 * words_per_replicate as u128);
        rng
    }

    /// A private generator for one replicate with unbounded consumption.
    pub fn replicate(&self, replicate: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(replicate.wrapping_add(1));
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn sequential_positions_agree_with_one_long_stream() {
        let s = ReplicateStreams::new(42, 0, Phase::Product, 3);
        let mut whole = s.sequential(0, 2);
        let all: Vec<u64> = (0..1000).map(|_| whole.next_u64()).collect();
        for start in [0u64, 1, 17, 999] {
            let mut part = s.sequential(start, 2);
            assert_eq!(part.next_u64(), all[start as usize]);
        }
    }

    #[test]
    fn keys_separate_streams() {
        let draw = |s: ReplicateStreams| s.sequential(0, 2).next_u64();
        let base = draw(ReplicateStreams::new(1, 0, Phase::Product, 0));
        assert_ne!(base, draw(ReplicateStreams::new(2, 0, Phase::Product, 0)));
        assert_ne!(base, draw(ReplicateStreams::new(1, 1, Phase::Product, 0)));
        assert_ne!(base, draw(ReplicateStreams::new(1, 0, Phase::PairedLow, 0)));
        assert_ne!(base, draw(ReplicateStreams::new(1, 0, Phase::Product, 1)));
        let s = ReplicateStreams::new(1, 0, Phase::Product, 0);
        assert_ne!(s.replicate(0).next_u64(), s.replicate(1).next_u64());
    }
}
