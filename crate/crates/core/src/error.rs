use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),

    #[error("no particles left to move: the empty configuration is absorbing")]
    AbsorbingEmpty,

    #[error("configurations have different site counts ({left} vs {right})")]
    SiteCountMismatch { left: usize, right: usize },

    #[error("state space has {states} states, above the cap of {cap}")]
    StateSpaceTooLarge { states: u64, cap: u64 },

    #[error("truncation overflow: tail mass {tail_mass:e} beyond K_max = {k_max}; raise K_max")]
    TruncationOverflow { k_max: usize, tail_mass: f64 },

    #[error("integrator produced a negative weight {value:e} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("divergence is infinite: reference law vanishes at index {index}")]
    InfiniteDivergence { index: usize },

    #[error("shift of a point mass at zero is undefined")]
    UndefinedShift,

    #[error("law is not normalized (total mass {mass})")]
    Unnormalized { mass: f64 },

    #[error("statistic laws use different binnings ({left} vs {right})")]
    BinningMismatch { left: &'static str, right: &'static str },

    #[error("curve never drops to epsilon; last value {final_value}")]
    NoCrossing { final_value: f64 },

    #[error("spectral gap must be positive (got {0})")]
    NonPositiveGap(f64),
}
