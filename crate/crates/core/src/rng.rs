//! Counter-based random streams keyed by `(seed, sample index)`.
//!
//! Each sample owns a ChaCha8 stream selected by its index, so the bits a
//! sample sees do not depend on which worker draws it or in what order.
//! The key mixes the seed with a domain tag and the dimension, so runs for
//! different quantities or dimensions never share bits.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::low_mask;

/// Factory for per-sample streams under one global seed.
#[derive(Clone, Debug)]
pub struct StreamKey {
    base: ChaCha8Rng,
}

/// What a stream is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Square matrices for singularity estimates.
    Singularity = 1,
    /// Spanning families for `E(d)` estimates.
    SpanFamily = 2,
}

impl StreamKey {
    pub fn new(seed: u64, domain: Domain, dim: usize) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
        key[16..24].copy_from_slice(&(dim as u64).to_le_bytes());
        StreamKey {
            base: ChaCha8Rng::from_seed(key),
        }
    }

    /// The stream for sample `index`, positioned at its start.
    pub fn stream(&self, index: u64) -> SampleStream {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        SampleStream { rng }
    }
}

/// Random bits for a single sample.
#[derive(Clone, Debug)]
pub struct SampleStream {
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64, domain: Domain, dim: usize, index: u64) -> Self {
        StreamKey::new(seed, domain, dim).stream(index)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// `bits` independent fair bits in the low end of a word (`bits <= 64`).
    pub fn next_bits(&mut self, bits: usize) -> u64 {
        debug_assert!(bits <= 64);
        if bits <= 32 {
            self.rng.next_u32() as u64 & low_mask(bits)
        } else {
            self.rng.next_u64() & low_mask(bits)
        }
    }
}
