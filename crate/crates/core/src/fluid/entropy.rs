use crate::error::{Error, Result};
use crate::fluid::{shift_law, ProbabilityVector};

/// `H(p) = Σ p_k log(1/p_k)` with `0 log(1/0) = 0`, natural log, over the
/// weights (the tail is not included).
pub fn entropy(p: &ProbabilityVector) -> f64 {
    p.weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * libm::log(w))
        .sum()
}

/// Closed form `(1+λ)log(1+λ) − λ log λ`.
pub fn geometric_entropy(lambda: f64) -> f64 {
    let tail = if lambda > 0.0 {
        lambda * libm::log(lambda)
    } else {
        0.0
    };
    (1.0 + lambda) * libm::log1p(lambda) - tail
}

/// `Σ_k q_k φ(p_k/q_k)` with `φ(u) = u log u − (u − 1)`, over two equally
/// long slices.
fn phi_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut d = 0.0;
    for (index, (&pk, &qk)) in p.iter().zip(q).enumerate() {
        if qk == 0.0 {
            if pk > 0.0 {
                return Err(Error::InfiniteDivergence { index });
            }
            continue;
        }
        d += if pk == 0.0 {
            qk
        } else {
            pk * libm::log(pk / qk) - pk + qk
        };
    }
    Ok(d)
}

/// Kullback–Leibler divergence `D(p‖q) = Σ q_k φ(p_k/q_k)`.
///
/// Returns [`Error::InfiniteDivergence`] when `q` vanishes where `p` does not.
pub fn kl_divergence(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    if p.weights().len() != q.weights().len() {
        return Err(Error::InvalidInput("laws must share K_max"));
    }
    phi_divergence(p.weights(), q.weights())
}

/// `V(p) = (1 − p_0)(D(p‖p̂) + D(p̂‖p))`, zero exactly on geometric laws.
///
/// Only indices `0..K_max` enter, since `p̂_{K_max}` depends on mass beyond
/// the truncation. A point mass at zero (the degenerate geometric law) gives 0.
pub fn entropy_production(p: &ProbabilityVector) -> Result<f64> {
    let p0 = p.weights()[0];
    if p0 >= 1.0 {
        return Ok(0.0);
    }
    let shifted = shift_law(p)?;
    let k = p.k_max();
    let a = &p.weights()[..k];
    let b = &shifted.weights()[..k];
    Ok((1.0 - p0) * (phi_divergence(a, b)? + phi_divergence(b, a)?))
}
