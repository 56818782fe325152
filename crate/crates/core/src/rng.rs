//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed by a derived seed and a stream number, so results never depend on
//! which thread draws first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep the hazard, damage and heuristic draws of one scenario
/// independent of each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Hazard = 1,
    Damage = 2,
    RandomOrder = 3,
    Candidates = 4,
    Testbed = 5,
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, purpose: Purpose) -> u64 {
    mix(seed ^ mix(purpose as u64))
}

pub fn stream(seed: u64, purpose: Purpose, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, purpose));
    rng.set_stream(stream);
    rng
}
