use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::DEFAULT_BOOTSTRAP;
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::exact::state_rank;
use crate::histogram::HeightHistogram;
use crate::rng::{RngStream, BOOTSTRAP_STREAM_BIT};

const NORMALIZATION_TOL: f64 = 1e-9;

/// Integer-valued observable of a configuration. Every variant bins exactly:
/// two configurations share a bin iff the statistic takes the same value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    /// `max_i η_i`.
    MaxHeight,
    /// Number of empty sites (the fraction times `n`).
    EmptyFraction,
    /// `⌊n ‖Q − 𝒢(m/n)‖₁⌋`.
    HeightHistogramDistance,
    /// Indicator of `max_i η_i ≥ ⌊√n⌋`.
    DistinguishingEvent,
    /// Lexicographic rank of the whole state; only for small instances.
    FullState,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::MaxHeight,
        Statistic::EmptyFraction,
        Statistic::HeightHistogramDistance,
        Statistic::DistinguishingEvent,
        Statistic::FullState,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::MaxHeight => "max_height",
            Statistic::EmptyFraction => "empty_fraction",
            Statistic::HeightHistogramDistance => "height_histogram_distance",
            Statistic::DistinguishingEvent => "distinguishing_event",
            Statistic::FullState => "full_state",
        }
    }

    pub fn evaluate(self, config: &Configuration) -> u64 {
        match self {
            Statistic::MaxHeight => config.max_height(),
            Statistic::EmptyFraction => config.empty_count() as u64,
            Statistic::HeightHistogramDistance => histogram_distance_bin(config),
            Statistic::DistinguishingEvent => {
                u64::from(config.max_height() >= super::distinguishing_threshold(config.n()))
            }
            Statistic::FullState => state_rank(config.heights()).unwrap_or(u64::MAX),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or(Error::InvalidInput("unknown statistic"))
    }
}

fn histogram_distance_bin(config: &Configuration) -> u64 {
    let n = config.n() as f64;
    let rho = config.m() as f64 / n;
    let theta = rho / (1.0 + rho);
    let hist = HeightHistogram::of(config);
    let mut g = 1.0 - theta;
    let mut dist = 0.0;
    for k in 0..=hist.max_height() {
        dist += (hist.count(k) as f64 / n - g).abs();
        g *= theta;
    }
    // 𝒢 mass above the largest height, where Q vanishes
    dist += libm::pow(theta, hist.max_height() as f64 + 1.0);
    libm::floor(n * dist) as u64
}

/// Law of a statistic, either sampled from replicas or known exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticLaw {
    statistic: Statistic,
    n: usize,
    masses: BTreeMap<u64, f64>,
    samples: Vec<u64>,
}

impl StatisticLaw {
    /// Empirical law of `samples` (statistic values, one per replica).
    pub fn from_samples(statistic: Statistic, n: usize, samples: Vec<u64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput("need at least two replicas"));
        }
        let w = 1.0 / samples.len() as f64;
        let mut masses = BTreeMap::new();
        for &s in &samples {
            *masses.entry(s).or_insert(0.0) += w;
        }
        Ok(Self {
            statistic,
            n,
            masses,
            samples,
        })
    }

    pub fn from_configs(statistic: Statistic, configs: &[Configuration]) -> Result<Self> {
        let n = configs.first().map_or(0, Configuration::n);
        if let Some(c) = configs.iter().find(|c| c.n() != n) {
            return Err(Error::SiteCountMismatch {
                left: n,
                right: c.n(),
            });
        }
        let samples = configs.iter().map(|c| statistic.evaluate(c)).collect();
        Self::from_samples(statistic, n, samples)
    }

    /// An exactly known law; it is never resampled.
    pub fn from_masses(statistic: Statistic, n: usize, masses: BTreeMap<u64, f64>) -> Result<Self> {
        if masses.values().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidInput("law has a negative or NaN entry"));
        }
        let mass: f64 = masses.values().sum();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized { mass });
        }
        Ok(Self {
            statistic,
            n,
            masses,
            samples: Vec::new(),
        })
    }

    /// Image of a law over explicit states under the statistic.
    pub fn pushforward(statistic: Statistic, states: &[Vec<u64>], law: &[f64]) -> Result<Self> {
        if states.len() != law.len() || states.is_empty() {
            return Err(Error::InvalidInput("states and law must match and be non-empty"));
        }
        let mut masses = BTreeMap::new();
        for (s, &p) in states.iter().zip(law) {
            let c = Configuration::new(s.clone())?;
            *masses.entry(statistic.evaluate(&c)).or_insert(0.0) += p;
        }
        Self::from_masses(statistic, states[0].len(), masses)
    }

    pub fn statistic(&self) -> Statistic {
        self.statistic
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn masses(&self) -> &BTreeMap<u64, f64> {
        &self.masses
    }

    pub fn mass(&self, bin: u64) -> f64 {
        self.masses.get(&bin).copied().unwrap_or(0.0)
    }

    /// Number of replicas, or 0 for an exact law.
    pub fn replicas(&self) -> usize {
        self.samples.len()
    }

    pub fn is_exact(&self) -> bool {
        self.samples.is_empty()
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.statistic != other.statistic {
            return Err(Error::BinningMismatch {
                left: self.statistic.name(),
                right: other.statistic.name(),
            });
        }
        if self.n != other.n {
            return Err(Error::SiteCountMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Plug-in TV distance between the two binned laws.
    pub fn tv_to(&self, other: &Self) -> Result<f64> {
        self.compatible(other)?;
        let mut sum = 0.0;
        for (k, p) in &self.masses {
            sum += (p - other.mass(*k)).abs();
        }
        for (k, q) in &other.masses {
            if !self.masses.contains_key(k) {
                sum += q;
            }
        }
        Ok((0.5 * sum).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// TV between the binned laws with a bootstrap standard error from a fixed
/// stream. This is a lower bound on `‖P_t(η,·) − π‖_TV` up to sampling error.
pub fn statistic_tv(process: &StatisticLaw, equilibrium: &StatisticLaw) -> Result<TvEstimate> {
    let mut rng = RngStream::new(0, BOOTSTRAP_STREAM_BIT);
    statistic_tv_with(process, equilibrium, &mut rng, DEFAULT_BOOTSTRAP)
}

/// As [`statistic_tv`], resampling each sampled law `resamples` times from
/// `rng` (multinomial bootstrap). Exact laws are held fixed.
pub fn statistic_tv_with(
    process: &StatisticLaw,
    equilibrium: &StatisticLaw,
    rng: &mut RngStream,
    resamples: usize,
) -> Result<TvEstimate> {
    let value = process.tv_to(equilibrium)?;
    if resamples < 2 || (process.is_exact() && equilibrium.is_exact()) {
        return Ok(TvEstimate { value, stderr: 0.0 });
    }
    let support: Vec<u64> = process
        .masses
        .keys()
        .chain(equilibrium.masses.keys())
        .copied()
        .collect::<alloc::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let p = Resampler::new(process, &support);
    let q = Resampler::new(equilibrium, &support);
    let mut pb = vec![0.0; support.len()];
    let mut qb = vec![0.0; support.len()];
    let draws: Vec<f64> = (0..resamples)
        .map(|_| {
            p.draw(rng, &mut pb);
            q.draw(rng, &mut qb);
            0.5 * pb.iter().zip(&qb).map(|(a, b)| (a - b).abs()).sum::<f64>()
        })
        .collect();
    let b = resamples as f64;
    let mean = draws.iter().sum::<f64>() / b;
    let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    Ok(TvEstimate {
        value,
        stderr: libm::sqrt(var),
    })
}

enum Resampler {
    Fixed(Vec<f64>),
    Sampled(Vec<u32>),
}

impl Resampler {
    fn new(law: &StatisticLaw, support: &[u64]) -> Self {
        let bin = |v: &u64| support.binary_search(v).expect("value in support") as u32;
        if law.is_exact() {
            let mut p = vec![0.0; support.len()];
            for (k, m) in &law.masses {
                p[bin(k) as usize] = *m;
            }
            Resampler::Fixed(p)
        } else {
            Resampler::Sampled(law.samples.iter().map(bin).collect())
        }
    }

    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        match self {
            Resampler::Fixed(p) => out.copy_from_slice(p),
            Resampler::Sampled(bins) => {
                out.iter_mut().for_each(|x| *x = 0.0);
                let w = 1.0 / bins.len() as f64;
                for _ in 0..bins.len() {
                    out[bins[rng.below(bins.len())] as usize] += w;
                }
            }
        }
    }
}
