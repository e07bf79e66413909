//! Reproducible stream derivation.
//!
//! Every random task (replicate, grid point, chunk of paths) owns a ChaCha8
//! generator keyed by the master seed, with the ChaCha stream id set to a
//! SplitMix64 hash of the task's coordinates. Streams never overlap, and a
//! task's draws do not depend on which thread runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds task coordinates into one stream id.
pub fn stream_id(coords: &[u64]) -> u64 {
    coords.iter().fold(0x5eed_0fc1_7ab5_u64, |h, &c| splitmix64(h ^ splitmix64(c)))
}

/// Generator for the task identified by `coords` under `master`.
pub fn stream_rng(master: u64, coords: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(coords));
    rng
}

/// Purpose tags used as the first stream coordinate.
pub mod tag {
    pub const PATH: u64 = 1;
    pub const SUMS: u64 = 2;
    pub const CONDITIONAL: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
    pub const THETA: u64 = 5;
    pub const CENTERING: u64 = 6;
    pub const VARIANCE: u64 = 7;
    pub const BERRY_ESSEEN: u64 = 8;
    pub const MOMENTS: u64 = 9;
    pub const REPLICATE: u64 = 10;
}
