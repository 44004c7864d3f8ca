//! Per-episode random streams.
//!
//! An experiment seed, a cell index and a replicate index are folded into a
//! single 64-bit episode seed. For a fixed experiment seed the map
//! `(cell, replicate) -> episode seed` is injective as long as
//! `cell < 2^24` and `replicate < 2^40`, so streams never collide inside a
//! plan. The episode seed keys a ChaCha8 generator directly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream used by every episode.
pub type Stream = ChaCha8Rng;

pub const MAX_CELLS: u64 = 1 << 24;
pub const MAX_REPLICATES: u64 = 1 << 40;

/// SplitMix64 finalizer. A bijection on `u64`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Episode seed for `(cell, replicate)` under `experiment_seed`.
///
/// Panics if either index exceeds the packing limits.
pub fn episode_seed(experiment_seed: u64, cell: u64, replicate: u64) -> u64 {
    assert!(cell < MAX_CELLS, "cell index {cell} exceeds 2^24");
    assert!(replicate < MAX_REPLICATES, "replicate index {replicate} exceeds 2^40");
    let packed = (cell << 40) | replicate;
    splitmix64(packed) ^ splitmix64(experiment_seed)
}

/// Stream keyed by a 64-bit episode seed. Distinct seeds give distinct keys.
pub fn stream(seed: u64) -> Stream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(b"bandtail");
    ChaCha8Rng::from_seed(key)
}
