//! Seed streams. Every stochastic operation takes an explicit seed; derived
//! streams are keyed by a tuple so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep frame draws and shot sampling decorrelated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Frame = 1,
    ShotsPlus = 2,
    ShotsMinus = 3,
    Tomography = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic hash of `(seed, parts...)`.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |h, &p| splitmix64(h ^ splitmix64(p)))
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for `hash(run_seed, tag, iteration, index)`.
pub fn stream(seed: u64, tag: StreamTag, iteration: usize, index: usize) -> ChaCha8Rng {
    seeded(derive_seed(
        seed,
        &[tag as u64, iteration as u64, index as u64],
    ))
}
