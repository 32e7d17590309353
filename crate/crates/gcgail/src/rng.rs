//! Seed-derived RNG streams.
//!
//! Every random choice in the crate draws from a ChaCha stream derived from
//! `(seed, label, index)`. Streams are independent of scheduling order, so
//! parallel generation and rollouts stay reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Derives an independent RNG stream from a base seed, a purpose label, and an
/// index (typically a passenger id or iteration number).
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([label.len() as u8]);
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}
