use alloc::vec;
use alloc::vec::Vec;

use crate::fluid::ProbabilityVector;

/// Writes `F(q)` for weights `q_0..=q_K` into `out` and returns the rate at
/// which mass leaves through the top (`r · q_K`), where `r = Σ_{ℓ≥1} q_ℓ + tail`.
/// Entries beyond `K` are taken as zero.
pub(crate) fn drift_into(q: &[f64], tail: f64, out: &mut [f64]) -> f64 {
    let k_max = q.len() - 1;
    let r: f64 = q[1..].iter().sum::<f64>() + tail;
    out[0] = q.get(1).copied().unwrap_or(0.0) - r * q[0];
    for k in 1..=k_max {
        let up = if k < k_max { q[k + 1] } else { 0.0 };
        out[k] = up - q[k] - r * (q[k] - q[k - 1]);
    }
    r * q[k_max]
}

/// The fluid drift
/// `F_k(q) = q_{k+1} − q_k 1(k≥1) − (Σ_{ℓ≥1} q_ℓ)(q_k − q_{k−1} 1(k≥1))`.
pub fn fluid_drift(q: &ProbabilityVector) -> Vec<f64> {
    let mut out = vec![0.0; q.weights().len()];
    drift_into(q.weights(), q.tail_mass(), &mut out);
    out
}
