//! Deterministic stream splitting.
//!
//! Every source of randomness in the crate is derived from a single base
//! seed plus a small stream id, so any component can be re-run in
//! isolation and reproduce exactly what it did inside a larger pipeline.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream ids used by the library. Keeping them in one place documents the
/// fan-out rule: `rng = ChaCha12(seed), stream = id`.
pub mod stream {
    pub const TEACHER_WEIGHTS: u64 = 1;
    pub const GIBBS_CHAIN: u64 = 2;
    /// Per-epoch noise draws start here; epoch t uses `NOISE_BASE + t`.
    pub const NOISE_BASE: u64 = 1000;
}

/// ChaCha generator on an independent stream of the base seed.
pub fn stream_rng(seed: u64, stream_id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
