//! Law `w_{k,ℓ}(t) = P(X(0) = k, X(t) = ℓ)` of the pair formed by a tagged
//! site's initial and current heights in the fluid limit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fluid::integrate::{clip, schedule, Rk4};
use crate::fluid::{FluidOptions, ProbabilityVector, NORMALIZATION_TOL};

/// Row-major `(K_max+1) × (K_max+1)` array indexed by `(k, ℓ)`, plus tail
/// mass that escaped past `ℓ = K_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix {
    side: usize,
    weights: Vec<f64>,
    tail_mass: f64,
}

impl PairMatrix {
    pub fn new(side: usize, weights: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if side == 0 || weights.len() != side * side {
            return Err(Error::InvalidInput("pair matrix must be square and non-empty"));
        }
        if weights
            .iter()
            .chain(core::iter::once(&tail_mass))
            .any(|w| !(*w >= 0.0) || !w.is_finite())
        {
            return Err(Error::InvalidInput("weights must be finite and non-negative"));
        }
        let mass = weights.iter().sum::<f64>() + tail_mass;
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized { mass });
        }
        Ok(Self {
            side,
            weights,
            tail_mass,
        })
    }

    /// `w_{k,ℓ} = q_k 1(k = ℓ)`, the pair law at time zero.
    pub fn diagonal(q: &ProbabilityVector) -> Self {
        let side = q.weights().len();
        let mut weights = vec![0.0; side * side];
        for (k, &qk) in q.weights().iter().enumerate() {
            weights[k * side + k] = qk;
        }
        Self {
            side,
            weights,
            tail_mass: q.tail_mass(),
        }
    }

    /// Independent coupling `w_{k,ℓ} = p_k r_ℓ`.
    pub fn product(p: &ProbabilityVector, r: &ProbabilityVector) -> Result<Self> {
        let side = p.weights().len();
        if r.weights().len() != side {
            return Err(Error::InvalidInput("laws must share K_max"));
        }
        let mut weights = Vec::with_capacity(side * side);
        for &pk in p.weights() {
            weights.extend(r.weights().iter().map(|&rl| pk * rl));
        }
        let tail = 1.0 - weights.iter().sum::<f64>();
        Ok(Self {
            side,
            weights,
            tail_mass: tail.max(0.0),
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn k_max(&self) -> usize {
        self.side - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.weights[k * self.side + l]
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.tail_mass
    }

    /// Law of the initial coordinate `k` (the tail is not attributed to rows).
    pub fn initial_marginal(&self) -> Vec<f64> {
        self.weights
            .chunks(self.side)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// Law of the current coordinate `ℓ`, with the tail carried over.
    pub fn current_marginal(&self) -> ProbabilityVector {
        let mut m = vec![0.0; self.side];
        for row in self.weights.chunks(self.side) {
            for (a, b) in m.iter_mut().zip(row) {
                *a += b;
            }
        }
        ProbabilityVector::from_parts_unchecked(m, self.tail_mass)
    }
}

/// Writes the pair drift into `out` and returns the rate into the tail.
fn drift_into(w: &[f64], side: usize, tail: f64, out: &mut [f64]) -> f64 {
    let r: f64 = w
        .chunks(side)
        .map(|row| row[1..].iter().sum::<f64>())
        .sum::<f64>()
        + tail;
    let mut to_tail = 0.0;
    for (row, o) in w.chunks(side).zip(out.chunks_mut(side)) {
        o[0] = row.get(1).copied().unwrap_or(0.0) - r * row[0];
        for l in 1..side {
            let up = if l + 1 < side { row[l + 1] } else { 0.0 };
            o[l] = up - row[l] - r * (row[l] - row[l - 1]);
        }
        to_tail += r * row[side - 1];
    }
    to_tail
}

/// `F_{k,ℓ}(w) = w_{k,ℓ+1} − 1(ℓ≥1) w_{k,ℓ} − (Σ_{k,ℓ≥1} w_{k,ℓ})(w_{k,ℓ} − 1(ℓ≥1) w_{k,ℓ−1})`.
pub fn pair_drift(w: &PairMatrix) -> Vec<f64> {
    let mut out = vec![0.0; w.weights.len()];
    drift_into(&w.weights, w.side, w.tail_mass, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<PairMatrix>,
}

impl PairTrajectory {
    pub fn last(&self) -> &PairMatrix {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }
}

pub fn integrate_pair(w0: &PairMatrix, t_end: f64, dt: f64) -> Result<PairTrajectory> {
    integrate_pair_with(w0, t_end, FluidOptions::new(dt).record_every(usize::MAX))
}

/// Fixed-step RK4 for the pair equation, with the same clipping and
/// truncation checks as the scalar fluid integrator.
pub fn integrate_pair_with(w0: &PairMatrix, t_end: f64, opts: FluidOptions) -> Result<PairTrajectory> {
    let steps = schedule(t_end, opts.dt)?;
    let side = w0.side;
    let len = side * side;
    let mut y = Vec::with_capacity(len + 1);
    y.extend_from_slice(&w0.weights);
    y.push(w0.tail_mass);
    let mut rk = Rk4::new(len + 1);
    let drift = |s: &[f64], out: &mut [f64]| {
        let (w, tail) = s.split_at(len);
        let (fw, ftail) = out.split_at_mut(len);
        ftail[0] = drift_into(w, side, tail[0], fw);
    };
    let mut times = vec![0.0];
    let mut states = vec![w0.clone()];
    let every = opts.record_every.max(1);
    for i in 1..=steps {
        let t_prev = (i - 1) as f64 * opts.dt;
        let t_next = if i == steps { t_end } else { i as f64 * opts.dt };
        rk.step(&mut y, t_next - t_prev, drift);
        clip(&mut y)?;
        if y[len] > opts.max_tail {
            return Err(Error::TruncationOverflow {
                k_max: side - 1,
                tail_mass: y[len],
            });
        }
        if i % every == 0 || i == steps {
            times.push(t_next);
            states.push(PairMatrix {
                side,
                weights: y[..len].to_vec(),
                tail_mass: y[len],
            });
        }
    }
    Ok(PairTrajectory { times, states })
}

/// `ℍ(Y|X) = Σ_{k,ℓ} w_{k,ℓ} log(P(X=k)/w_{k,ℓ})`.
pub fn conditional_entropy(w: &PairMatrix) -> f64 {
    w.weights
        .chunks(w.side)
        .map(|row| {
            let mk: f64 = row.iter().sum();
            row.iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| x * libm::log(mk / x))
                .sum::<f64>()
        })
        .sum()
}
