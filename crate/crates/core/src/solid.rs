//! Dissolution of the solid phase.
//!
//! With initial heights `η_i ≈ n u_i`, the rescaled heights `η_i(nt)/n`
//! follow `v_i(t) = (u_i − f(t))₊` where `f` solves
//! `f' = 1/(1 + ρ − Σ_j (u_j − f)₊)`, `f(0) = 0`. The dissolution times
//!
//! ```text
//! t_i = u_i (1 + ρ + (i−1) u_i / 2 − Σ_{j<i} u_j) − ½ Σ_{j≥i} u_j²
//! ```
//!
//! are where `v_i` reaches zero; `t_1` is the mixing-time constant.
//! Between consecutive breakpoints `f` is explicit:
//!
//! ```text
//! f(t) = sqrt(2(t − t_{i+1})/i + (a_i/i + u_{i+1})²) − a_i/i,   t ∈ (t_{i+1}, t_i]
//! f(t) = (t − t_1)/(1 + ρ) + u_1,                             t ≥ t_1
//! ```
//!
//! with `a_i = 1 + ρ − Σ_{j≤i} u_j`. The offset `u_{i+1}` inside the square
//! root is the value that makes `f` continuous at `t_{i+1}`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const PROFILE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolidProfile {
    u: Vec<f64>,
    rho: f64,
}

impl SolidProfile {
    /// `u` must be non-negative and non-increasing with `Σ u_i ≤ ρ`.
    pub fn new(u: Vec<f64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidInput("density must be positive and finite"));
        }
        if u.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidInput(
                "limiting heights must be finite and non-negative",
            ));
        }
        if u.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("limiting heights must be non-increasing"));
        }
        if u.iter().sum::<f64>() > rho + PROFILE_SLACK {
            return Err(Error::InvalidInput("limiting heights exceed the density"));
        }
        Ok(Self { u, rho })
    }

    /// All mass on one site: `u = (ρ)`.
    pub fn worst_case(rho: f64) -> Result<Self> {
        Self::new(alloc::vec![rho], rho)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Number of strictly positive heights.
    pub fn solid_sites(&self) -> usize {
        self.u.iter().take_while(|&&x| x > 0.0).count()
    }

    fn get(&self, i: usize) -> f64 {
        self.u.get(i).copied().unwrap_or(0.0)
    }
}

/// `t_i` for `i = 1..=len(u)` (returned 0-based).
pub fn dissolution_times(profile: &SolidProfile) -> Vec<f64> {
    let u = profile.u();
    let mut suffix_sq: Vec<f64> = u.iter().map(|x| x * x).collect();
    for i in (0..suffix_sq.len().saturating_sub(1)).rev() {
        suffix_sq[i] += suffix_sq[i + 1];
    }
    let mut prefix = 0.0;
    u.iter()
        .enumerate()
        .map(|(i, &ui)| {
            let t = ui * (1.0 + profile.rho + i as f64 * ui / 2.0 - prefix) - 0.5 * suffix_sq[i];
            prefix += ui;
            t
        })
        .collect()
}

/// `(1+ρ)u₁ − ½ Σ u_i²`.
pub fn predicted_mixing_constant(profile: &SolidProfile) -> f64 {
    let sq: f64 = profile.u.iter().map(|x| x * x).sum();
    (1.0 + profile.rho) * profile.get(0) - 0.5 * sq
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolidSolution {
    profile: SolidProfile,
    times: Vec<f64>,
    /// `a_i = 1 + ρ − Σ_{j≤i} u_j`, 1-based `i` stored at `i − 1`.
    slack: Vec<f64>,
    solid: usize,
}

impl SolidSolution {
    pub fn new(profile: SolidProfile) -> Self {
        let times = dissolution_times(&profile);
        let mut acc = 1.0 + profile.rho;
        let slack = profile
            .u
            .iter()
            .map(|x| {
                acc -= x;
                acc
            })
            .collect();
        let solid = profile.solid_sites();
        Self {
            profile,
            times,
            slack,
            solid,
        }
    }

    pub fn profile(&self) -> &SolidProfile {
        &self.profile
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn mixing_constant(&self) -> f64 {
        self.time(1)
    }

    /// 1-based `t_i`, with `t_i = 0` past the last solid site.
    fn time(&self, i: usize) -> f64 {
        if i == 0 || i > self.solid {
            0.0
        } else {
            self.times[i - 1]
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return 0.0;
        }
        let rho = self.profile.rho;
        let t1 = self.time(1);
        if t > t1 || self.solid == 0 {
            return (t - t1) / (1.0 + rho) + self.profile.get(0);
        }
        // t ∈ (t_{i+1}, t_i] for exactly one i in 1..=L
        let i = (1..=self.solid)
            .find(|&i| t > self.time(i + 1) && t <= self.time(i))
            .unwrap_or(self.solid);
        let fi = i as f64;
        let a = self.slack[i - 1] / fi;
        let gamma = self.profile.get(i);
        libm::sqrt(2.0 * (t - self.time(i + 1)) / fi + (a + gamma) * (a + gamma)) - a
    }

    /// `v_i(t) = (u_i − f(t))₊` for every entry of the profile.
    pub fn v(&self, t: f64) -> Vec<f64> {
        let f = self.f(t);
        self.profile.u.iter().map(|&ui| (ui - f).max(0.0)).collect()
    }

    /// `1/(1 + ρ − Σ_j (u_j − f(t))₊)`.
    pub fn f_derivative(&self, t: f64) -> f64 {
        rate(&self.profile, self.f(t))
    }
}

pub fn evaluate_f(solution: &SolidSolution, t: f64) -> f64 {
    solution.f(t)
}

pub fn evaluate_v(solution: &SolidSolution, t: f64) -> Vec<f64> {
    solution.v(t)
}

fn rate(profile: &SolidProfile, g: f64) -> f64 {
    let solid: f64 = profile.u.iter().map(|&u| (u - g).max(0.0)).sum();
    1.0 / (1.0 + profile.rho - solid)
}

/// Numerical solution of the integral equation on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrajectory {
    pub times: Vec<f64>,
    /// `∫₀ᵗ ds / (1 + ρ − Σ v_j(s))` at each time.
    pub elapsed: Vec<f64>,
    u: Vec<f64>,
}

impl OracleTrajectory {
    pub fn v(&self, index: usize) -> Vec<f64> {
        let g = self.elapsed[index];
        self.u.iter().map(|&u| (u - g).max(0.0)).collect()
    }

    /// First grid time at which `v_i` (0-based `i`) is zero.
    pub fn vanish_time(&self, i: usize) -> Option<f64> {
        let ui = *self.u.get(i)?;
        self.elapsed.iter().position(|&g| g >= ui).map(|k| self.times[k])
    }
}

/// Integrates `g' = 1/(1 + ρ − Σ_j (u_j − g)₊)` by fixed-step RK4, so that
/// `v_i = (u_i − g)₊`. Independent of the closed form; used to validate it.
pub fn ode_oracle(profile: &SolidProfile, t_end: f64, dt: f64) -> Result<OracleTrajectory> {
    if !(dt > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInput(
            "need dt > 0 and a finite non-negative horizon",
        ));
    }
    let steps = libm::ceil(t_end / dt * (1.0 - 1e-12)) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut elapsed = Vec::with_capacity(steps + 1);
    let mut g = 0.0;
    times.push(0.0);
    elapsed.push(0.0);
    for i in 1..=steps {
        let t_prev = (i - 1) as f64 * dt;
        let t_next = if i == steps { t_end } else { i as f64 * dt };
        let h = t_next - t_prev;
        let k1 = rate(profile, g);
        let k2 = rate(profile, g + 0.5 * h * k1);
        let k3 = rate(profile, g + 0.5 * h * k2);
        let k4 = rate(profile, g + h * k3);
        g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        times.push(t_next);
        elapsed.push(g);
    }
    Ok(OracleTrajectory {
        times,
        elapsed,
        u: profile.u.clone(),
    })
}
