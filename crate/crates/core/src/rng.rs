//! Seeded randomness. Every generator draws from a ChaCha stream keyed by
//! `(seed, stream)`, so a given purpose always sees the same sequence no
//! matter what else was drawn before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod streams {
    pub const PHASES: u64 = 1;
    pub const COEFFS: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const POINTS: u64 = 4;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
