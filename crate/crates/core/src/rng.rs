//! Seeded random streams.
//!
//! Every Monte Carlo trial owns one [`RngStream`]. A stream is a ChaCha20
//! keystream keyed by the master seed and selected by a 64-bit stream id, so
//! trial `i` always sees the same numbers no matter which thread runs it or in
//! which order trials are scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Where a batch of draws came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream: u64,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha20Rng,
    seed: u64,
    stream: u64,
}

impl RngStream {
    /// Stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0)
    }

    /// Independent stream `stream` of the master `seed`.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream {
            inner,
            seed,
            stream,
        }
    }

    /// Stream reserved for trial `trial` of an experiment. Stream 0 is left for
    /// experiment-level draws.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::derive(seed, trial.wrapping_add(1))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn provenance(&self, label: impl Into<String>) -> Provenance {
        Provenance {
            seed: self.seed,
            stream: self.stream,
            label: label.into(),
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
