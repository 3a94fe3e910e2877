//! Seeded random streams.
//!
//! All randomness goes through ChaCha8. A `(seed, stream)` pair selects an
//! independent keystream, so trial `i` of a suite can be replayed without
//! running trials `0..i`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for substream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
