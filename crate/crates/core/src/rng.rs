//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed by a seed derived from a base seed and a path of integers, so any
//! unit of work can be reproduced in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `path` into `base`, one component at a time.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_at(base: u64, path: &[u64]) -> Rng {
    rng_from(derive_seed(base, path))
}

/// Stable stream identifiers, so that unrelated consumers of one base seed
/// never share a stream.
pub mod stream {
    pub const INIT: u64 = 0x1001;
    pub const SHUFFLE: u64 = 0x1002;
    pub const TRAIN_MASK: u64 = 0x1003;
    pub const VALID_MASK: u64 = 0x1004;
    pub const EVAL_MASK: u64 = 0x1005;
    pub const DATA: u64 = 0x2001;
    pub const SPLIT: u64 = 0x2002;
    pub const FOLD: u64 = 0x2003;
    pub const SEARCH: u64 = 0x3001;
    pub const FITNESS: u64 = 0x3002;
    pub const FINAL: u64 = 0x4001;
}
