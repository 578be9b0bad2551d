//! Empirical height distribution `Q` and empirical transition matrix `W`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::Configuration;
use crate::error::{Error, Result};

/// Number of sites at each height, stored densely up to the maximum height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightHistogram {
    counts: Vec<u64>,
    n: usize,
}

impl HeightHistogram {
    pub fn of(config: &Configuration) -> Self {
        let mut counts = vec![0u64; config.max_height() as usize + 1];
        for &h in config.heights() {
            counts[h as usize] += 1;
        }
        Self {
            counts,
            n: config.n(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self, height: u64) -> u64 {
        self.counts.get(height as usize).copied().unwrap_or(0)
    }

    pub fn max_height(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    /// Non-zero `(height, count)` pairs in increasing height order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k as u64, c))
    }

    /// Total particles, `Σ k · count(k)`.
    pub fn mass(&self) -> u64 {
        self.iter().map(|(k, c)| k * c).sum()
    }

    /// `Q_k = count(k)/n` for `k = 0..=len-1`, zero-padded to `len`.
    pub fn frequencies(&self, len: usize) -> Vec<f64> {
        let n = self.n as f64;
        (0..len).map(|k| self.count(k as u64) as f64 / n).collect()
    }
}

/// Number of sites starting at height `k` and currently at `ℓ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairHistogram {
    counts: BTreeMap<(u64, u64), u64>,
    n: usize,
}

impl PairHistogram {
    pub fn between(initial: &Configuration, current: &Configuration) -> Result<Self> {
        if initial.n() != current.n() {
            return Err(Error::SiteCountMismatch {
                left: initial.n(),
                right: current.n(),
            });
        }
        let mut counts = BTreeMap::new();
        for (&k, &l) in initial.heights().iter().zip(current.heights()) {
            *counts.entry((k, l)).or_insert(0) += 1;
        }
        Ok(Self {
            counts,
            n: initial.n(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self, k: u64, l: u64) -> u64 {
        self.counts.get(&(k, l)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u64, u64), u64)> + '_ {
        self.counts.iter().map(|(&kl, &c)| (kl, c))
    }

    /// Site counts by initial height.
    pub fn initial_marginal(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for (&(k, _), &c) in &self.counts {
            *out.entry(k).or_insert(0) += c;
        }
        out
    }

    /// Site counts by current height.
    pub fn current_marginal(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for (&(_, l), &c) in &self.counts {
            *out.entry(l).or_insert(0) += c;
        }
        out
    }

    /// `W_{k,ℓ}` as a row-major `(k_max+1)²` array; pairs outside the range
    /// are dropped.
    pub fn frequencies(&self, k_max: usize) -> Vec<f64> {
        let side = k_max + 1;
        let mut w = vec![0.0; side * side];
        let n = self.n as f64;
        for (&(k, l), &c) in &self.counts {
            if (k as usize) < side && (l as usize) < side {
                w[k as usize * side + l as usize] = c as f64 / n;
            }
        }
        w
    }
}

pub fn height_histogram(config: &Configuration) -> HeightHistogram {
    HeightHistogram::of(config)
}

pub fn pair_histogram(initial: &Configuration, current: &Configuration) -> Result<PairHistogram> {
    PairHistogram::between(initial, current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn cfg(h: &[u64]) -> Configuration {
        Configuration::new(h.to_vec()).unwrap()
    }

    #[test]
    fn height_histogram_examples() {
        let h = height_histogram(&cfg(&[2, 0, 1]));
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![(0, 1), (1, 1), (2, 1)]);
        let h = height_histogram(&cfg(&[0, 0, 0]));
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![(0, 3)]);
        let h = height_histogram(&cfg(&[3, 3]));
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![(3, 2)]);
        assert_eq!(h.mass(), 6);
        assert_eq!(h.n(), 2);
    }

    #[test]
    fn pair_histogram_examples() {
        let a = cfg(&[2, 0, 1]);
        let p = pair_histogram(&a, &a).unwrap();
        assert_eq!(
            p.iter().collect::<Vec<_>>(),
            vec![((0, 0), 1), ((1, 1), 1), ((2, 2), 1)]
        );
        let p = pair_histogram(&cfg(&[1, 0]), &cfg(&[0, 1])).unwrap();
        assert_eq!(p.count(1, 0), 1);
        assert_eq!(p.count(0, 1), 1);
        assert_eq!(p.count(0, 0), 0);
        assert!(matches!(
            pair_histogram(&cfg(&[1, 0]), &cfg(&[1])),
            Err(Error::SiteCountMismatch { .. })
        ));
    }

    #[test]
    fn pair_marginals_reproduce_histograms() {
        let a = cfg(&[4, 0, 1, 1, 0, 2]);
        let b = cfg(&[2, 1, 1, 0, 3, 1]);
        let p = pair_histogram(&a, &b).unwrap();
        let ha: BTreeMap<u64, u64> = height_histogram(&a).iter().collect();
        let hb: BTreeMap<u64, u64> = height_histogram(&b).iter().collect();
        assert_eq!(p.initial_marginal(), ha);
        assert_eq!(p.current_marginal(), hb);
        assert_eq!(p.iter().map(|(_, c)| c).sum::<u64>(), 6);
    }
}
