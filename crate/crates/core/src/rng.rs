//! Seed derivation. Every stochastic stage draws from a ChaCha stream whose
//! seed is a hash of a root seed and a path of indices, so results do not
//! depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `root` with each element of `path` into a new 64-bit seed.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(root), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from(root: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(root, path))
}

/// Stage tags used when deriving per-stage seeds from a manifest root seed.
pub mod stage {
    pub const GENERATE: u64 = 1;
    pub const ENUMERATE: u64 = 2;
    pub const SA: u64 = 3;
    pub const QUANTUM: u64 = 4;
    pub const COMPARE: u64 = 5;
    pub const PILOT: u64 = 6;
}
