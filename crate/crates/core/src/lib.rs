//! Mean-field zero-range process on the complete graph.
//!
//! Every non-empty site expels one particle at unit rate to a site chosen
//! uniformly among all `n` sites. This crate contains the algorithmic pieces:
//!
//! * [`config`]: exact event-driven (Gillespie) simulation, the Poisson-clock
//!   coupling, and truncation of the solid phase.
//! * [`equilibrium`]: uniform sampling over the state space via stars and bars.
//! * [`histogram`]: empirical height distribution and empirical transition matrix.
//! * [`exact`]: transition law of tiny instances by uniformization.
//! * [`fluid`]: the nonlinear fluid-limit ODE, its pair refinement and the
//!   entropy functionals attached to it.
//! * [`solid`]: closed-form dissolution of the solid phase and the mixing-time
//!   constant `(1+ρ)u₁ − ½Σuᵢ²`.
//! * [`metrics`]: total variation, statistic-based TV lower bounds, mixing
//!   time estimation and entropy bounds.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. All floating point special functions go through `libm` so results
//! are bit-identical regardless of the feature set.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod config;
pub mod equilibrium;
pub mod error;
pub mod exact;
pub mod fluid;
pub mod histogram;
pub mod metrics;
pub mod rng;
pub mod solid;

pub use config::Configuration;
pub use error::{Error, Result};
pub use histogram::{HeightHistogram, PairHistogram};
pub use rng::RngStream;
