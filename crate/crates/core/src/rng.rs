//! Reproducible per-replica random streams.
//!
//! A stream is a ChaCha8 keystream keyed by the master seed, with the replica
//! index selecting the 64-bit stream nonce. Streams are therefore independent
//! by construction, and the draws seen by one replica do not depend on how
//! many other replicas exist or on which thread runs them.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

/// Stream ids with this bit set are reserved for equilibrium (reference) draws.
pub const EQUILIBRIUM_STREAM_BIT: u64 = 1 << 63;
/// Stream ids with this bit set are reserved for bootstrap resampling.
pub const BOOTSTRAP_STREAM_BIT: u64 = 1 << 62;

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform index in `0..bound`. `bound` must be positive.
    #[inline]
    pub fn below(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }

    /// Standard exponential variate (rate 1).
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.inner)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
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
