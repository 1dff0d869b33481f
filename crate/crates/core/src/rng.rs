//! Seeded random streams.
//!
//! Every random draw in the library comes from ChaCha8 (a counter-based
//! stream cipher generator). A `(seed, stream)` pair fully determines the
//! sequence: the seed is expanded with `seed_from_u64` and the 64-bit
//! stream id selects an independent keystream, so parallel workers given
//! distinct stream ids never share randomness and results do not depend on
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// The generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
