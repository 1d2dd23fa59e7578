//! Seeding. Every random object is a deterministic function of a 64-bit seed;
//! experiments derive one seed per sample from `(seed, experiment, sample)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of sample `sample` of experiment `experiment`: the first output of the
/// ChaCha stream `sample` keyed by `(seed, experiment)`.
pub fn derive_seed(seed: u64, experiment: u64, sample: u64) -> u64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&experiment.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(sample);
    rng.next_u64()
}
