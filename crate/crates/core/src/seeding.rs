//! Seed derivation: one master seed fans out to every randomized stage.
//!
//! Sub-seeds are derived by hashing a purpose label (and optional index) into
//! the master seed with FNV-1a, so `--seed N` reproduces an entire experiment
//! while distinct stages never share an RNG stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Derive a sub-seed for `label` from `master`.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hash = FNV_OFFSET ^ master.wrapping_mul(FNV_PRIME);
    for byte in label.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Derive a sub-seed for the `index`-th instance of `label`.
pub fn derive_seed_indexed(master: u64, label: &str, index: u64) -> u64 {
    let mut hash = derive_seed(master, label);
    for byte in index.to_le_bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Seeded generator used everywhere randomness is needed; ChaCha8 keeps the
/// streams portable across platforms and releases.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
