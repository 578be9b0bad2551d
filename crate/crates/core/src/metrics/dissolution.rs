use crate::config::Configuration;
use crate::error::{Error, Result};

/// `⌊√n⌋`, the height threshold of the distinguishing event.
pub fn distinguishing_threshold(n: usize) -> u64 {
    n.isqrt() as u64
}

/// Fraction of replicas with `max_i η_i ≥ ⌊√n⌋`.
pub fn distinguishing_event_probability(ensemble: &[Configuration]) -> Result<f64> {
    let Some(first) = ensemble.first() else {
        return Err(Error::InvalidInput("empty ensemble"));
    };
    let n = first.n();
    let threshold = distinguishing_threshold(n);
    let mut hits = 0usize;
    for c in ensemble {
        if c.n() != n {
            return Err(Error::SiteCountMismatch {
                left: n,
                right: c.n(),
            });
        }
        hits += usize::from(c.max_height() >= threshold);
    }
    Ok(hits as f64 / ensemble.len() as f64)
}

/// `|Q₀ − 1/(1 + ρ − Σ_{i≤L} η_(i)/n)|` with `η_(1) ≥ η_(2) ≥ …` the ordered
/// heights: the empty fraction against the prediction from the `L` largest
/// sites acting as a reservoir.
pub fn dissolution_rate_residual(config: &Configuration, rho: f64, l: usize) -> Result<f64> {
    if l > config.n() {
        return Err(Error::InvalidInput("L must not exceed n"));
    }
    let n = config.n() as f64;
    let empty = config.empty_count() as f64 / n;
    let predicted = 1.0 / (1.0 + rho - config.top_mass(l) as f64 / n);
    Ok((empty - predicted).abs())
}
