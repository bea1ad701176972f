//! Named random streams. Each (preset, seed, purpose) triple maps through
//! SHA-256 to the 32-byte key of a ChaCha20 generator, so streams are
//! independent, portable and stable across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha20Rng;

pub fn stream(preset: &str, seed: u64, purpose: &str) -> Stream {
    let mut h = Sha256::new();
    h.update(b"frida-stream/1\0");
    h.update(preset.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    h.update(purpose.as_bytes());
    let key: [u8; 32] = h.finalize().into();
    ChaCha20Rng::from_seed(key)
}
