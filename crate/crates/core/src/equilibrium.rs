//! Uniform sampling from `Ω = {η ∈ Z₊ⁿ : Σηᵢ = m}`.
//!
//! Stars and bars: a configuration is the sequence of gaps between `n − 1`
//! bars placed among `m + n − 1` slots. A uniform `(n−1)`-subset of slots is
//! drawn by sequential selection sampling, which visits slots in order and so
//! yields the bar positions already sorted.

use alloc::vec;

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub fn equilibrium_sample(n: usize, m: u64, rng: &mut RngStream) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1"));
    }
    let slots = m + n as u64 - 1;
    let mut bars_left = n as u64 - 1;
    let mut heights = vec![0u64; n];
    let mut site = 0usize;
    let mut gap = 0u64;
    let mut slot = 0u64;
    while bars_left > 0 {
        let remaining = slots - slot;
        // select this slot with probability bars_left / remaining
        if (rng.below(remaining as usize) as u64) < bars_left {
            heights[site] = gap;
            site += 1;
            gap = 0;
            bars_left -= 1;
        } else {
            gap += 1;
        }
        slot += 1;
    }
    heights[site] = gap + (slots - slot);
    Configuration::new(heights)
}
