//! Seeded random streams.
//!
//! Every randomized step in the toolkit draws from a ChaCha8 generator keyed
//! by `(seed, purpose)`. Distinct purposes use distinct ChaCha stream ids, so
//! sampling palettes, permuting a stream and running the solver never share
//! draws even when they are handed the same user seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named draw purposes. The discriminant is the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Generator = 1,
    Palette = 2,
    Solver = 3,
    StreamOrder = 4,
    RandomCover = 5,
    RandomLists = 6,
    Experiment = 7,
}

/// Generator for `purpose` under `seed`.
pub fn stream(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// Derive an independent child seed, e.g. one per retry attempt.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
