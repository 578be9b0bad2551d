use alloc::vec::Vec;

use super::statistic::{statistic_tv_with, Statistic, StatisticLaw};
use crate::config::Configuration;
use crate::equilibrium::equilibrium_sample;
use crate::error::{Error, Result};
use crate::rng::{RngStream, BOOTSTRAP_STREAM_BIT, EQUILIBRIUM_STREAM_BIT};

/// TV lower bounds on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingCurve {
    times: Vec<f64>,
    tv: Vec<f64>,
    stderr: Vec<f64>,
}

impl MixingCurve {
    pub fn new(times: Vec<f64>, tv: Vec<f64>, stderr: Vec<f64>) -> Result<Self> {
        if times.len() != tv.len() || times.len() != stderr.len() {
            return Err(Error::InvalidInput("curve columns differ in length"));
        }
        if tv.iter().any(|x| !(0.0..=1.0).contains(x)) || stderr.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidInput("tv outside [0,1] or negative error bar"));
        }
        Ok(Self { times, tv, stderr })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn tv(&self) -> &[f64] {
        &self.tv
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The same curve with times divided by `scale` (e.g. `t/n`).
    pub fn rescaled(&self, scale: f64) -> Self {
        Self {
            times: self.times.iter().map(|t| t / scale).collect(),
            ..self.clone()
        }
    }

    /// First time the curve is at or below `level`, linearly interpolated
    /// between the bracketing grid points.
    pub fn first_below(&self, level: f64) -> Option<f64> {
        let k = self.tv.iter().position(|&v| v <= level)?;
        if k == 0 {
            return Some(self.times[0]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (v0, v1) = (self.tv[k - 1], self.tv[k]);
        Some(t0 + (v0 - level) / (v0 - v1) * (t1 - t0))
    }

    /// Interpolated `ε`-crossing, or [`Error::NoCrossing`] with the last value.
    pub fn crossing(&self, epsilon: f64) -> Result<f64> {
        self.first_below(epsilon).ok_or(Error::NoCrossing {
            final_value: self.tv.last().copied().unwrap_or(f64::NAN),
        })
    }

    /// Time between the first drops below `upper` and below `lower`.
    pub fn drop_width(&self, upper: f64, lower: f64) -> Option<f64> {
        Some(self.first_below(lower)? - self.first_below(upper)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingSetup {
    pub statistic: Statistic,
    pub grid: Vec<f64>,
    pub replicas: usize,
    pub equilibrium_replicas: usize,
    pub bootstrap: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingEstimate {
    pub epsilon: f64,
    pub curve: MixingCurve,
    pub crossing: Option<f64>,
}

impl MixingEstimate {
    pub fn crossing_time(&self) -> Result<f64> {
        self.curve.crossing(self.epsilon)
    }
}

pub fn process_stream(master_seed: u64, replica: usize) -> RngStream {
    RngStream::new(master_seed, replica as u64)
}

pub fn equilibrium_stream(master_seed: u64, replica: usize) -> RngStream {
    RngStream::new(master_seed, EQUILIBRIUM_STREAM_BIT | replica as u64)
}

pub fn bootstrap_stream(master_seed: u64, grid_index: usize) -> RngStream {
    RngStream::new(master_seed, BOOTSTRAP_STREAM_BIT | grid_index as u64)
}

/// Runs one replica from `initial` and records `observe(state)` at each grid time.
pub fn replica_trace<T, F>(
    initial: &Configuration,
    grid: &[f64],
    rng: &mut RngStream,
    mut observe: F,
) -> Result<Vec<T>>
where
    F: FnMut(&Configuration) -> T,
{
    let mut state = initial.clone();
    let mut out = Vec::with_capacity(grid.len());
    let t_end = grid.last().copied().unwrap_or(state.clock());
    state.run_until(t_end, rng, grid, |_, _, c| out.push(observe(c)))?;
    Ok(out)
}

/// Statistic values of one replica at each grid time.
pub fn replica_statistics(
    initial: &Configuration,
    statistic: Statistic,
    grid: &[f64],
    rng: &mut RngStream,
) -> Result<Vec<u64>> {
    replica_trace(initial, grid, rng, |c| statistic.evaluate(c))
}

/// Statistic value of one uniform equilibrium sample.
pub fn equilibrium_statistics(n: usize, m: u64, statistic: Statistic, rng: &mut RngStream) -> Result<u64> {
    Ok(statistic.evaluate(&equilibrium_sample(n, m, rng)?))
}

/// Builds the curve from per-replica traces (`process[r][g]`) and
/// equilibrium samples. Bootstrap streams are keyed by grid index.
pub fn curve_from_samples(
    statistic: Statistic,
    n: usize,
    grid: &[f64],
    process: &[Vec<u64>],
    equilibrium: &[u64],
    bootstrap: usize,
    master_seed: u64,
) -> Result<MixingCurve> {
    if process.iter().any(|r| r.len() != grid.len()) {
        return Err(Error::InvalidInput("replica trace length differs from the grid"));
    }
    let eq = StatisticLaw::from_samples(statistic, n, equilibrium.to_vec())?;
    let mut tv = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    for g in 0..grid.len() {
        let samples = process.iter().map(|r| r[g]).collect();
        let law = StatisticLaw::from_samples(statistic, n, samples)?;
        let est = statistic_tv_with(&law, &eq, &mut bootstrap_stream(master_seed, g), bootstrap)?;
        tv.push(est.value);
        stderr.push(est.stderr);
    }
    MixingCurve::new(grid.to_vec(), tv, stderr)
}

fn check_grid(grid: &[f64], start: f64) -> Result<()> {
    if grid.is_empty() || !(grid[0] >= start) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "time grid must be non-empty, increasing and not before the start",
        ));
    }
    if !grid[grid.len() - 1].is_finite() {
        return Err(Error::InvalidInput("time grid must be finite"));
    }
    Ok(())
}

/// Sequential mixing-time estimate: replicas from `initial`, equilibrium
/// samples, the statistic TV curve and its interpolated `ε`-crossing. The
/// crossing estimates the mixing time from below.
pub fn mixing_time_estimate(
    initial: &Configuration,
    epsilon: f64,
    setup: &MixingSetup,
) -> Result<MixingEstimate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput("epsilon must lie in (0,1)"));
    }
    check_grid(&setup.grid, initial.clock())?;
    let process = (0..setup.replicas)
        .map(|r| {
            replica_statistics(
                initial,
                setup.statistic,
                &setup.grid,
                &mut process_stream(setup.master_seed, r),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let equilibrium = (0..setup.equilibrium_replicas)
        .map(|i| {
            equilibrium_statistics(
                initial.n(),
                initial.m(),
                setup.statistic,
                &mut equilibrium_stream(setup.master_seed, i),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = curve_from_samples(
        setup.statistic,
        initial.n(),
        &setup.grid,
        &process,
        &equilibrium,
        setup.bootstrap,
        setup.master_seed,
    )?;
    let crossing = curve.first_below(epsilon);
    Ok(MixingEstimate {
        epsilon,
        curve,
        crossing,
    })
}
