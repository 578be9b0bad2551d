use crate::error::{Error, Result};

fn ln_factorial(k: u64) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// `log (Σa)! / Π a_k!`.
pub fn combinatorial_entropy(a: &[u64]) -> f64 {
    let total: u64 = a.iter().sum();
    let h = ln_factorial(total) - a.iter().map(|&k| ln_factorial(k)).sum::<f64>();
    h.max(0.0)
}

/// `log C(m+n−1, n−1)`.
pub fn log_state_count(n: usize, m: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1"));
    }
    let n = n as f64;
    let m = m as f64;
    let v = libm::lgamma(m + n) - libm::lgamma(m + 1.0) - libm::lgamma(n);
    Ok(v.max(0.0))
}

/// `(1+ρ) log(1+ρ) − ρ log ρ`, the limit of `log N(n, ρn) / n`.
pub fn per_site_entropy_limit(rho: f64) -> f64 {
    let mut h = (1.0 + rho) * libm::log(1.0 + rho);
    if rho > 0.0 {
        h -= rho * libm::log(rho);
    }
    h
}

/// `(1/gap)(D/ε + log(1/ε) + 1)`: time after which TV is at most `ε` when
/// the relative entropy to equilibrium is `D` and the spectral gap is `gap`.
pub fn entropy_gap_time(kl: f64, epsilon: f64, gap: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return Err(Error::NonPositiveGap(gap));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) || !(kl >= 0.0) {
        return Err(Error::InvalidInput("need epsilon in (0,1) and kl >= 0"));
    }
    Ok((kl / epsilon + libm::log(1.0 / epsilon) + 1.0) / gap)
}

/// Union bound `π(max_i η_i ≥ k) ≤ n (m/(m+n−1))^k`, capped at 1.
pub fn equilibrium_max_tail_bound(n: usize, m: u64, k: u64) -> f64 {
    if k == 0 || n == 0 {
        return 1.0;
    }
    if k > m {
        return 0.0;
    }
    let ratio = m as f64 / (m as f64 + n as f64 - 1.0);
    (n as f64 * libm::pow(ratio, k as f64)).min(1.0)
}
