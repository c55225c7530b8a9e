//! Seed derivation.
//!
//! Every stochastic step draws from a ChaCha8 stream whose seed is derived
//! from a master seed and a path of integers (tree index, fold index, lag,
//! window, ...). The mixing function is SplitMix64's finalizer applied after
//! folding each path element in with the golden-ratio increment, so derived
//! streams depend only on the path and never on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a path of stream identifiers.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    let mut state = mix64(master.wrapping_add(GOLDEN_GAMMA));
    for &p in path {
        state = mix64(state ^ p.wrapping_add(GOLDEN_GAMMA).wrapping_mul(GOLDEN_GAMMA));
    }
    state
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(master: u64, path: &[u64]) -> Rng {
    rng(derive(master, path))
}

/// Stable 64-bit hash of a string (first eight bytes of its SHA-256).
pub fn stable_hash(text: &str) -> u64 {
    let digest = Sha256::digest(text.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Lowercase hex SHA-256, used for config digests and file provenance.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
