//! Fluid limit of the empirical height distribution.
//!
//! As `n → ∞` the empirical distribution `Q(t)` follows the deterministic
//! nonlinear system
//!
//! ```text
//! dq_k/dt = q_{k+1} − q_k·1(k≥1) − (Σ_{ℓ≥1} q_ℓ)(q_k − q_{k−1}·1(k≥1))
//! ```
//!
//! which conserves mass and mean and relaxes to the geometric law with the
//! same mean. Laws live on `0..=K_max`; mass pushed past `K_max` is collected
//! in an explicit tail and the integrator refuses to continue once that tail
//! becomes significant.

mod drift;
mod entropy;
mod integrate;
mod law;
mod pair;

pub use drift::fluid_drift;
pub use entropy::{entropy, entropy_production, geometric_entropy, kl_divergence};
pub use integrate::{integrate_fluid, integrate_fluid_with, FluidOptions, FluidTrajectory};
pub use law::{geometric_law, shift_law, tilted_density, ProbabilityVector};
pub use pair::{
    conditional_entropy, integrate_pair, integrate_pair_with, pair_drift, PairMatrix, PairTrajectory,
};

/// Default truncation level, adequate for densities up to about 2.
pub const DEFAULT_K_MAX: usize = 200;
/// Integration aborts once the tail beyond `K_max` exceeds this.
pub const DEFAULT_MAX_TAIL: f64 = 1e-9;
/// Negative weights above this are roundoff and get clipped to zero.
pub const CLIP_THRESHOLD: f64 = -1e-10;
/// Normalization slack accepted when constructing a law.
pub const NORMALIZATION_TOL: f64 = 1e-12;
