//! Seeded randomness.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`)
//! seeded with `seed_from_u64`, so outputs are reproducible across
//! platforms. Independent workers derived from one master seed use the
//! same key with ChaCha stream id `k` for worker `k` (see [`worker_rng`]).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for worker `stream` of a run seeded with `seed`.
pub fn worker_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(stream);
    rng
}
