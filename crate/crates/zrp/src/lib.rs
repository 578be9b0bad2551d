//! Experiment runner and file formats for the mean-field zero-range process.
//!
//! [`experiment::run_experiment`] executes a JSON [`spec::ExperimentSpec`]
//! over a worker pool and writes CSV tables, JSON summaries and a
//! `result.json` that [`replay::replay`] can re-run byte for byte.

pub mod experiment;
pub mod output;
pub mod parallel;
pub mod plot;
pub mod replay;
pub mod spec;

pub use experiment::run_experiment;
pub use parallel::Workers;
pub use plot::emit_plot;
pub use replay::replay;
pub use spec::{ExperimentKind, ExperimentResult, ExperimentSpec};
