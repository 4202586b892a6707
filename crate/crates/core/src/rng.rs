//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator seeded with
//! the caller's 64-bit seed. Independent sub-streams are addressed by a path
//! of integer tags (trial index, replicate index, resample size, ...), which
//! is folded through SplitMix64 into the ChaCha stream id. Two computations
//! that use the same `(seed, path)` see identical draws on every platform and
//! regardless of how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags for the top-level consumers, so that e.g. sample generation
/// and bootstrap replicates of the same trial never overlap.
pub mod tag {
    pub const GENERATE: u64 = 1;
    pub const TRIAL: u64 = 2;
    pub const CALIBRATE: u64 = 3;
    pub const PERCENTILE: u64 = 4;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a seed and a tag path into a single 64-bit value.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Generator for the sub-stream `path` of `seed`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(derive_seed(0, path));
    rng
}
