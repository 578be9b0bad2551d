//! Exact transition law for tiny instances.
//!
//! States are listed in increasing lexicographic order of their height arrays,
//! e.g. for `n = 2, m = 2`: `[0,2], [1,1], [2,0]`. The law `P_t(η, ·)` is
//! computed by uniformization: with `Λ` the largest exit rate, `P_t` is the
//! Poisson(`Λt`) mixture of powers of the jump kernel `K = I + L/Λ`. Long
//! horizons are split into chunks with `Λh ≤ 32` so the Poisson weights never
//! underflow.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::Configuration;
use crate::error::{Error, Result};

pub const DEFAULT_STATE_CAP: u64 = 5000;

const CHUNK: f64 = 32.0;
const POISSON_TAIL: f64 = 1e-16;

/// `N(n, m) = C(m+n−1, n−1)`, or `None` on overflow.
pub fn state_count(n: usize, m: u64) -> Option<u64> {
    if n == 0 {
        return Some(u64::from(m == 0));
    }
    let k = n as u128 - 1;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul(m as u128 + i)? / i;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Position of `heights` in the lexicographic enumeration of its state space.
pub fn state_rank(heights: &[u64]) -> Option<u64> {
    let n = heights.len();
    let mut remaining: u64 = heights.iter().sum();
    let mut rank: u64 = 0;
    for (i, &h) in heights.iter().enumerate().take(n.saturating_sub(1)) {
        let parts = n - i - 1;
        for v in 0..h {
            rank = rank.checked_add(state_count(parts, remaining - v)?)?;
        }
        remaining -= h;
    }
    Some(rank)
}

/// All states of `Ω(n, m)` in lexicographic order.
pub fn enumerate_states(n: usize, m: u64) -> Vec<Vec<u64>> {
    fn rec(prefix: &mut Vec<u64>, left: usize, m: u64, out: &mut Vec<Vec<u64>>) {
        if left == 1 {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for h in 0..=m {
            prefix.push(h);
            rec(prefix, left - 1, m - h, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(&mut Vec::with_capacity(n), n, m, &mut out);
    }
    out
}

/// Generator of `Ω(n, m)` stored as sparse off-diagonal rates.
#[derive(Debug, Clone)]
pub struct ExactChain {
    n: usize,
    m: u64,
    states: Vec<Vec<u64>>,
    index: BTreeMap<Vec<u64>, usize>,
    rates: Vec<Vec<(usize, f64)>>,
    exit: Vec<f64>,
    uniform_rate: f64,
}

impl ExactChain {
    pub fn new(n: usize, m: u64) -> Result<Self> {
        Self::with_cap(n, m, DEFAULT_STATE_CAP)
    }

    pub fn with_cap(n: usize, m: u64, cap: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1"));
        }
        let count = state_count(n, m).unwrap_or(u64::MAX);
        if count > cap {
            return Err(Error::StateSpaceTooLarge { states: count, cap });
        }
        let states = enumerate_states(n, m);
        let index: BTreeMap<Vec<u64>, usize> =
            states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let per_pair = 1.0 / n as f64;
        let mut rates = Vec::with_capacity(states.len());
        let mut exit = Vec::with_capacity(states.len());
        let mut scratch = vec![0u64; n];
        for s in &states {
            let mut row: BTreeMap<usize, f64> = BTreeMap::new();
            for i in (0..n).filter(|&i| s[i] > 0) {
                for j in (0..n).filter(|&j| j != i) {
                    scratch.copy_from_slice(s);
                    scratch[i] -= 1;
                    scratch[j] += 1;
                    *row.entry(index[&scratch]).or_insert(0.0) += per_pair;
                }
            }
            exit.push(row.values().sum());
            rates.push(row.into_iter().collect());
        }
        let uniform_rate = exit.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            n,
            m,
            states,
            index,
            rates,
            exit,
            uniform_rate,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn states(&self) -> &[Vec<u64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, heights: &[u64]) -> Option<usize> {
        self.index.get(heights).copied()
    }

    pub fn uniform(&self) -> Vec<f64> {
        vec![1.0 / self.len() as f64; self.len()]
    }

    /// One application of the jump kernel: `out = v K`.
    fn kernel_apply(&self, v: &[f64], out: &mut [f64]) {
        let lam = self.uniform_rate;
        for (o, (&vi, &e)) in out.iter_mut().zip(v.iter().zip(&self.exit)) {
            *o = vi * (1.0 - e / lam);
        }
        for (i, row) in self.rates.iter().enumerate() {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for &(j, r) in row {
                out[j] += vi * r / lam;
            }
        }
    }

    /// `μ P_t` for an initial law `μ` over the enumerated states.
    pub fn evolve(&self, initial: &[f64], t: f64) -> Result<Vec<f64>> {
        if initial.len() != self.len() {
            return Err(Error::InvalidInput("initial law has the wrong length"));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput("time must be finite and non-negative"));
        }
        let mut law = initial.to_vec();
        if self.uniform_rate == 0.0 || t == 0.0 {
            return Ok(law);
        }
        let total = self.uniform_rate * t;
        let chunks = libm::ceil(total / CHUNK).max(1.0) as usize;
        let a = total / chunks as f64;
        let mut power = vec![0.0; self.len()];
        let mut next = vec![0.0; self.len()];
        for _ in 0..chunks {
            power.copy_from_slice(&law);
            let mut weight = libm::exp(-a);
            for (l, p) in law.iter_mut().zip(&power) {
                *l = weight * p;
            }
            let mut k = 0usize;
            // for k ≥ 2a the remaining Poisson tail is below twice the current weight
            while weight > POISSON_TAIL || (k as f64) < 2.0 * a {
                self.kernel_apply(&power, &mut next);
                core::mem::swap(&mut power, &mut next);
                k += 1;
                weight *= a / k as f64;
                for (l, p) in law.iter_mut().zip(&power) {
                    *l += weight * p;
                }
            }
        }
        Ok(law)
    }

    /// `P_t(η, ·)` over the enumerated states.
    pub fn law_from(&self, heights: &[u64], t: f64) -> Result<Vec<f64>> {
        let i = self
            .index_of(heights)
            .ok_or(Error::InvalidInput("configuration is not a state of this chain"))?;
        let mut init = vec![0.0; self.len()];
        init[i] = 1.0;
        self.evolve(&init, t)
    }
}

/// Exact law of the process started at `config`, after time `t`, over the
/// states returned by [`enumerate_states`] for the same `(n, m)`.
pub fn exact_law(config: &Configuration, t: f64) -> Result<Vec<f64>> {
    ExactChain::new(config.n(), config.m())?.law_from(config.heights(), t)
}
