//! Deterministic random number generation.
//!
//! Every random draw in the crate goes through [`DetRng`], a ChaCha20 stream
//! cipher generator. A `(seed, stream)` pair fully determines the sequence, so
//! independent consumers (for example sweep samples) each get their own
//! stream and never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type DetRng = ChaCha20Rng;

/// Algorithm identifier reported by the CLI version string.
pub const RNG_ALGORITHM: &str = "chacha20/rand_chacha-0.9/seed_from_u64";

pub fn seeded(seed: u64) -> DetRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Generator for stream `stream` under key `seed`. Streams are disjoint
/// 2^64-block ChaCha20 keystreams, so no mixing function is needed.
pub fn stream(seed: u64, stream: u64) -> DetRng {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng
}
