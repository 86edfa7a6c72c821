//! Seed handling: a counter-based split of one master seed into independent
//! streams, so trial `i` of an experiment is reproducible in isolation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate. Seedable, fast, and stream-splittable.
pub type SimRng = ChaCha8Rng;

/// RNG for a whole run derived from a master seed.
pub fn master_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the master seed. Streams never overlap, so
/// parallel trials stay deterministic regardless of scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
