//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` keyed by a master seed
//! and a small tuple of labels, so that sample `i` of a dataset or the shuffle
//! stream of a training run never depends on how many draws other consumers
//! made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels. Distinct values keep unrelated consumers apart.
pub mod stream {
    pub const INIT: u64 = 0x11;
    pub const SHUFFLE: u64 = 0x22;
    pub const TRAIN_SAMPLE: u64 = 0x33;
    pub const TEST_SAMPLE: u64 = 0x44;
    pub const NOISE: u64 = 0x55;
    pub const GRF: u64 = 0x66;
    pub const PROBE: u64 = 0x77;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with a sequence of labels into a new 64-bit seed.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

/// A ChaCha stream keyed by `(seed, labels)`.
pub fn stream_rng(seed: u64, labels: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, labels))
}
