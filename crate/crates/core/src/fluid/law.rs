use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fluid::NORMALIZATION_TOL;

/// A law on `{0, …, K_max}` plus the mass `tail_mass` lying beyond `K_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
    tail_mass: f64,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("law needs at least one weight"));
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
        Ok(Self { weights, tail_mass })
    }

    /// Normalizes arbitrary non-negative weights (no tail).
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidInput("weights must have positive finite total"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect(), 0.0)
    }

    pub(crate) fn from_parts_unchecked(weights: Vec<f64>, tail_mass: f64) -> Self {
        Self { weights, tail_mass }
    }

    pub fn point_mass(k: usize, k_max: usize) -> Result<Self> {
        if k > k_max {
            return Err(Error::InvalidInput("point mass beyond K_max"));
        }
        let mut w = vec![0.0; k_max + 1];
        w[k] = 1.0;
        Ok(Self {
            weights: w,
            tail_mass: 0.0,
        })
    }

    /// `Σ_i c_i · law_i` for convex weights `c`; all laws must share `K_max`.
    pub fn mixture(parts: &[(f64, &ProbabilityVector)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::InvalidInput("empty mixture"));
        };
        let len = first.weights.len();
        let mut w = vec![0.0; len];
        let mut tail = 0.0;
        for &(c, p) in parts {
            if p.weights.len() != len {
                return Err(Error::InvalidInput("mixture components differ in K_max"));
            }
            for (a, b) in w.iter_mut().zip(&p.weights) {
                *a += c * b;
            }
            tail += c * p.tail_mass;
        }
        Self::new(w, tail)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights.get(k).copied().unwrap_or(0.0)
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn k_max(&self) -> usize {
        self.weights.len() - 1
    }

    /// `Σ weights + tail_mass`.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.tail_mass
    }

    /// `Σ k · weights_k` (the tail is not included).
    pub fn mean(&self) -> f64 {
        self.weights.iter().enumerate().map(|(k, w)| k as f64 * w).sum()
    }

    /// ℓ¹ distance over the common index range, with unmatched entries and
    /// both tails counted in full.
    pub fn l1_distance(&self, other: &ProbabilityVector) -> f64 {
        l1_distance(&self.weights, &other.weights) + (self.tail_mass - other.tail_mass).abs()
    }

    pub fn sup_distance(&self, other: &ProbabilityVector) -> f64 {
        let len = self.weights.len().max(other.weights.len());
        (0..len)
            .map(|k| (self.weight(k) - other.weight(k)).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    (0..len)
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum()
}

/// Geometric law with mean `rho`: `G_k = (1/(1+ρ)) (ρ/(1+ρ))^k`.
pub fn geometric_law(rho: f64, k_max: usize) -> Result<ProbabilityVector> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidInput("density must be finite and non-negative"));
    }
    let ratio = rho / (1.0 + rho);
    let mut w = Vec::with_capacity(k_max + 1);
    let mut g = 1.0 / (1.0 + rho);
    for _ in 0..=k_max {
        w.push(g);
        g *= ratio;
    }
    Ok(ProbabilityVector {
        weights: w,
        tail_mass: libm::pow(ratio, (k_max + 1) as f64),
    })
}

/// The tilted density `λ = Σ k q_k`.
pub fn tilted_density(q: &ProbabilityVector) -> f64 {
    q.mean()
}

/// `p̂_k = p_{k+1} / (1 − p_0)`. The last weight is unknown from the truncated
/// data and is set to zero; the shifted tail carries `tail/(1 − p_0)`.
pub fn shift_law(p: &ProbabilityVector) -> Result<ProbabilityVector> {
    let p0 = p.weights[0];
    let norm = 1.0 - p0;
    if !(norm > 0.0) {
        return Err(Error::UndefinedShift);
    }
    let k_max = p.k_max();
    let mut w: Vec<f64> = p.weights[1..].iter().map(|x| x / norm).collect();
    w.push(0.0);
    debug_assert_eq!(w.len(), k_max + 1);
    Ok(ProbabilityVector {
        weights: w,
        tail_mass: p.tail_mass / norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_examples() {
        let g = geometric_law(1.0, 10).unwrap();
        assert_eq!(g.weight(0), 0.5);
        assert!((g.weight(2) - 0.125).abs() < 1e-16);
        assert!((g.total_mass() - 1.0).abs() < 1e-15);
        let z = geometric_law(0.0, 5).unwrap();
        assert_eq!(z.weight(0), 1.0);
        assert!((1..=5).all(|k| z.weight(k) == 0.0));
        assert_eq!(z.tail_mass(), 0.0);
        assert!(geometric_law(-0.1, 5).is_err());
    }

    #[test]
    fn tilted_density_examples() {
        for rho in [0.3, 1.0, 2.0] {
            let g = geometric_law(rho, 200).unwrap();
            assert!((tilted_density(&g) - rho).abs() < 1e-10);
        }
        assert_eq!(tilted_density(&ProbabilityVector::point_mass(0, 4).unwrap()), 0.0);
        assert_eq!(tilted_density(&ProbabilityVector::point_mass(3, 4).unwrap()), 3.0);
    }

    #[test]
    fn shift_examples() {
        for lam in [0.5, 1.0, 2.0] {
            let g = geometric_law(lam, 120).unwrap();
            let s = shift_law(&g).unwrap();
            assert!(g.sup_distance(&s) <= 1e-14, "{lam}");
        }
        let p = ProbabilityVector::new(vec![0.5, 0.5, 0.0], 0.0).unwrap();
        assert_eq!(shift_law(&p).unwrap().weights(), &[1.0, 0.0, 0.0]);
        let p = ProbabilityVector::point_mass(2, 4).unwrap();
        assert_eq!(
            shift_law(&p).unwrap(),
            ProbabilityVector::point_mass(1, 4).unwrap()
        );
        let p = ProbabilityVector::point_mass(0, 4).unwrap();
        assert_eq!(shift_law(&p), Err(Error::UndefinedShift));
    }

    #[test]
    fn constructor_validates() {
        assert!(matches!(
            ProbabilityVector::new(vec![0.5, 0.4], 0.0),
            Err(Error::Unnormalized { .. })
        ));
        assert!(ProbabilityVector::new(vec![1.5, -0.5], 0.0).is_err());
        assert!(ProbabilityVector::new(vec![], 1.0).is_err());
    }
}
