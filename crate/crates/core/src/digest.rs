//! Content digests used to fingerprint backgrounds and training configs.

use alloc::string::String;
use sha2::{Digest, Sha256};

/// Incremental SHA-256 over typed values.
#[derive(Default, Clone)]
pub struct ContentHasher(Sha256);

impl ContentHasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn usize(&mut self, v: usize) -> &mut Self {
        self.0.update((v as u64).to_le_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.0.update(v.to_le_bytes());
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.0.update(v.to_bits().to_le_bytes());
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.usize(s.len());
        self.0.update(s.as_bytes());
        self
    }

    /// Lower-case hex of the first 16 bytes.
    pub fn finish(self) -> String {
        let out = self.0.finalize();
        hex::encode(&out[..16])
    }
}
