//! Label-split random streams.
//!
//! A stream is identified by `(master_seed, path)`; the ChaCha8 key is the
//! SHA-256 digest of that identity, so a child stream never depends on how
//! many samples its parent or siblings have drawn. Sweeps hand out paths
//! before any work starts, which keeps results independent of scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<(String, u64)>,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        Self::with_path(master_seed, Vec::new())
    }

    fn with_path(master_seed: u64, path: Vec<(String, u64)>) -> Self {
        let mut h = Sha256::new();
        h.update(b"tqsync-stream-v1");
        h.update(master_seed.to_le_bytes());
        for (name, index) in &path {
            h.update((name.len() as u64).to_le_bytes());
            h.update(name.as_bytes());
            h.update(index.to_le_bytes());
        }
        let key: [u8; 32] = h.finalize().into();
        RngStream {
            master_seed,
            path,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// A fresh, independent stream at `path ++ [(name, index)]`.
    pub fn child(&self, name: &str, index: u64) -> RngStream {
        let mut path = self.path.clone();
        path.push((name.to_owned(), index));
        Self::with_path(self.master_seed, path)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[(String, u64)] {
        &self.path
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}
