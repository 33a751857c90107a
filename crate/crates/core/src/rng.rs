//! Counter-based random streams.
//!
//! Every draw in the crate comes from a ChaCha8 stream whose key is derived
//! from `(seed, stream label)` and whose stream number is the replicate (or
//! resample) index. The bits produced for a given `(seed, label, index)`
//! therefore do not depend on thread scheduling or on how many other streams
//! were consumed before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a of a label; stable across platforms and releases.
pub fn stable_hash(label: &str) -> u64 {
    label
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Opens the stream for `(seed, label, index)`.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stable_hash(label).to_le_bytes());
    key[16..24].copy_from_slice(&(label.len() as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// A single uniform index in `0..n` from the stream `(seed, label, index)`.
pub fn uniform_index(seed: u64, label: &str, index: u64, n: usize) -> usize {
    assert!(n > 0, "uniform_index over an empty range");
    stream(seed, label, index).gen_range(0..n)
}
