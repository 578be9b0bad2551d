//! Fixed-size worker pool with order-preserving collection.

use anyhow::{Context, Result};
use rayon::prelude::*;

pub struct Workers {
    pool: rayon::ThreadPool,
}

impl Workers {
    /// `threads == 0` uses one worker per available core.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building worker pool")?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// `f(0..count)` evaluated in parallel, returned in index order.
    pub fn map<T, E, F>(&self, count: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}
