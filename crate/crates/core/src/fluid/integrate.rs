use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fluid::drift::drift_into;
use crate::fluid::entropy::{entropy, entropy_production};
use crate::fluid::{ProbabilityVector, CLIP_THRESHOLD, DEFAULT_MAX_TAIL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidOptions {
    pub dt: f64,
    /// Keep every `record_every`-th step (the final state is always kept).
    pub record_every: usize,
    pub max_tail: f64,
}

impl FluidOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            record_every: 1,
            max_tail: DEFAULT_MAX_TAIL,
        }
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ProbabilityVector>,
}

impl FluidTrajectory {
    pub fn last(&self) -> &ProbabilityVector {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    pub fn entropies(&self) -> Vec<f64> {
        self.states.iter().map(entropy).collect()
    }

    /// Entropy production along the trajectory; `None` where it is infinite.
    pub fn productions(&self) -> Vec<Option<f64>> {
        self.states.iter().map(|s| entropy_production(s).ok()).collect()
    }
}

/// Classical RK4 step on a flat state with an arbitrary drift.
pub(crate) struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    pub(crate) fn step<F>(&mut self, y: &mut [f64], h: f64, mut f: F)
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        f(y, &mut self.k1);
        for ((t, &a), &b) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = a + 0.5 * h * b;
        }
        f(&self.tmp, &mut self.k2);
        for ((t, &a), &b) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = a + 0.5 * h * b;
        }
        f(&self.tmp, &mut self.k3);
        for ((t, &a), &b) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = a + h * b;
        }
        f(&self.tmp, &mut self.k4);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Step count and per-step size covering `[0, t_end]` with nominal step `dt`;
/// the last step is shortened when `t_end` is not a multiple of `dt`.
pub(crate) fn schedule(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput("dt must be positive"));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInput("horizon must be finite and non-negative"));
    }
    Ok(libm::ceil(t_end / dt * (1.0 - 1e-12)) as usize)
}

/// Clips roundoff negatives; anything below the threshold is a failure.
pub(crate) fn clip(weights: &mut [f64]) -> Result<()> {
    for (index, w) in weights.iter_mut().enumerate() {
        if *w < 0.0 {
            if *w < CLIP_THRESHOLD {
                return Err(Error::NegativeWeight { index, value: *w });
            }
            *w = 0.0;
        }
    }
    Ok(())
}

pub fn integrate_fluid(q0: &ProbabilityVector, t_end: f64, dt: f64) -> Result<FluidTrajectory> {
    integrate_fluid_with(q0, t_end, FluidOptions::new(dt))
}

/// Fixed-step RK4 integration of the fluid equation. The state carries the
/// tail beyond `K_max` as an extra absorbing coordinate so that total mass is
/// conserved exactly by the truncated system.
pub fn integrate_fluid_with(
    q0: &ProbabilityVector,
    t_end: f64,
    opts: FluidOptions,
) -> Result<FluidTrajectory> {
    let steps = schedule(t_end, opts.dt)?;
    let len = q0.weights().len();
    let mut y = Vec::with_capacity(len + 1);
    y.extend_from_slice(q0.weights());
    y.push(q0.tail_mass());
    let mut times = vec![0.0];
    let mut states = vec![q0.clone()];
    let mut rk = Rk4::new(len + 1);
    let drift = |s: &[f64], out: &mut [f64]| {
        let (q, tail) = s.split_at(len);
        let (fq, ftail) = out.split_at_mut(len);
        ftail[0] = drift_into(q, tail[0], fq);
    };
    let every = opts.record_every.max(1);
    for i in 1..=steps {
        let t_prev = (i - 1) as f64 * opts.dt;
        let t_next = if i == steps { t_end } else { i as f64 * opts.dt };
        rk.step(&mut y, t_next - t_prev, drift);
        clip(&mut y)?;
        if y[len] > opts.max_tail {
            return Err(Error::TruncationOverflow {
                k_max: len - 1,
                tail_mass: y[len],
            });
        }
        if i % every == 0 || i == steps {
            times.push(t_next);
            states.push(ProbabilityVector::from_parts_unchecked(y[..len].to_vec(), y[len]));
        }
    }
    Ok(FluidTrajectory { times, states })
}
