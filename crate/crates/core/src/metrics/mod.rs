//! Total variation, mixing-time estimation and entropy bounds.
//!
//! At large `n` the law `P_t(η, ·)` is out of reach, so mixing is measured
//! through a statistic `S`: the TV distance between the laws of `S` under the
//! process and under equilibrium never exceeds the true TV distance. Curves
//! built from these estimates are therefore lower bounds.

mod bounds;
mod dissolution;
mod mixing;
mod statistic;
mod tv;

pub use bounds::{
    combinatorial_entropy, entropy_gap_time, equilibrium_max_tail_bound, log_state_count,
    per_site_entropy_limit,
};
pub use dissolution::{
    dissolution_rate_residual, distinguishing_event_probability, distinguishing_threshold,
};
pub use mixing::{
    bootstrap_stream, curve_from_samples, equilibrium_statistics, equilibrium_stream, mixing_time_estimate,
    process_stream, replica_statistics, replica_trace, MixingCurve, MixingEstimate, MixingSetup,
};
pub use statistic::{statistic_tv, statistic_tv_with, Statistic, StatisticLaw, TvEstimate};
pub use tv::tv_distance;

/// Bootstrap resamples used by [`statistic_tv`].
pub const DEFAULT_BOOTSTRAP: usize = 200;
