//! Seeded random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used by every kernel and experiment.
pub type WalkRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> WalkRng {
    WalkRng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> WalkRng {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng
}
