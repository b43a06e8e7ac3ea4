//! Test support for the tabcompare crates: seeded random scores, a
//! `.tabtxt` writer, and slow but obviously correct reference
//! implementations ("oracles") that the fast code is checked against.

pub mod gen;
pub mod oracle;
pub mod tabtxt;

pub use rand::Rng;
pub use rand_chacha::ChaCha8Rng;

use rand::SeedableRng;

/// Reproducible generator for a test case.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
