use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-9;

/// `½ Σ |p_i − q_i|`. The shorter law is padded with zeros.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check(p)?;
    check(q)?;
    let len = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let sum: f64 = (0..len).map(|i| (at(p, i) - at(q, i)).abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

fn check(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidInput("law has a negative or NaN entry"));
    }
    let mass: f64 = p.iter().sum();
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Unnormalized { mass });
    }
    Ok(())
}
