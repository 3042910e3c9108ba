//! Named deterministic random sub-streams derived from one 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Purposes that draw randomness; each gets its own ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Data = 1,
    Queries = 2,
    Permutation = 3,
    Family = 4,
    Hyperplanes = 5,
    Run = 6,
    Sample = 7,
}

/// Generator for `(seed, stream, index)`. Distinct triples give independent
/// streams; equal triples replay the same values.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 56) ^ index);
    rng
}

/// A child seed, used when a whole component (a repeat, a build) needs its
/// own top-level seed.
pub fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed, stream, index).next_u64()
}
