//! Counter-based random streams.
//!
//! Every random draw in the generator comes from a ChaCha stream keyed by the
//! master seed and addressed by `(sample index, purpose)`. A sample therefore
//! sees the same numbers no matter which worker produces it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Each purpose gets a disjoint ChaCha stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Kpi = 0,
    Fractal = 1,
    /// Dataset-level draws (class position shuffle).
    Layout = 2,
    /// Perlin lattice permutation.
    Permutation = 3,
}

const PURPOSE_BITS: u32 = 4;

/// Stream for one sample and purpose.
pub fn stream(master_seed: u64, index: u64, purpose: Purpose) -> ChaCha8Rng {
    debug_assert!(index < (1 << (64 - PURPOSE_BITS)));
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((index << PURPOSE_BITS) | purpose as u64);
    rng
}

/// Stream for dataset-wide draws that are not tied to a sample.
pub fn global(master_seed: u64, purpose: Purpose) -> ChaCha8Rng {
    stream(master_seed, (1 << (64 - PURPOSE_BITS)) - 1, purpose)
}
