//! Declarative experiment descriptions and their results.

use std::path::PathBuf;

use anyhow::{bail, ensure, Result};
use serde::{Deserialize, Serialize};
use zrp_core::metrics::Statistic;
use zrp_core::solid::SolidProfile;

/// Bumped whenever the layout of results or curve files changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Statistic TV curve from a solid-phase start; grid in units of `n`.
    CutoffCurve,
    /// Heights of the initially tallest sites against `v_i`; grid in units of `n`.
    DissolutionTrack,
    /// Fluid ODE from `q0` towards the geometric law; absolute grid.
    FluidRelaxation,
    /// `‖Q(t) − 𝔮(t)‖₁` against `n` from a liquid start; absolute grid.
    ChaosScaling,
    /// Simulated laws against the exact law on tiny instances; absolute grid.
    OracleValidation,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CutoffCurve => "cutoff_curve",
            ExperimentKind::DissolutionTrack => "dissolution_track",
            ExperimentKind::FluidRelaxation => "fluid_relaxation",
            ExperimentKind::ChaosScaling => "chaos_scaling",
            ExperimentKind::OracleValidation => "oracle_validation",
        }
    }

    /// Whether grid times are given in units of `n`.
    pub fn scaled_time(self) -> bool {
        matches!(
            self,
            ExperimentKind::CutoffCurve | ExperimentKind::DissolutionTrack
        )
    }
}

/// Accepted range for the headline numbers of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tolerance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Tolerance {
    pub fn accepts(&self, x: f64) -> bool {
        x.is_finite() && self.min.is_none_or(|m| x >= m) && self.max.is_none_or(|m| x <= m)
    }
}

fn default_epsilon() -> f64 {
    0.25
}

fn default_statistic() -> String {
    Statistic::MaxHeight.name().into()
}

fn default_equilibrium_replicas() -> usize {
    2000
}

fn default_bootstrap() -> usize {
    200
}

fn default_dt() -> f64 {
    1e-3
}

fn default_k_max() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// System sizes; ignored by `fluid_relaxation`.
    #[serde(default)]
    pub n: Vec<usize>,
    pub rho: f64,
    /// Limiting solid heights `u_i`; defaults to `(ρ)` for solid-phase kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    /// Single initial state for `oracle_validation`, instead of all states of `(n, m)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heights: Option<Vec<u64>>,
    /// Initial height law for liquid and fluid experiments; defaults to `δ_ρ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<Vec<f64>>,
    /// Particle counts for `oracle_validation` (all states of each `(n, m)`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<u64>,
    pub grid: Vec<f64>,
    #[serde(default)]
    pub replicas: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_statistic")]
    pub statistic: String,
    /// Further statistics evaluated on the same `cutoff_curve` replicas.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_statistics: Vec<String>,
    #[serde(default = "default_equilibrium_replicas")]
    pub equilibrium_replicas: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    /// Sites tracked in `dissolution_track` output; defaults to `len(u)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<usize>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Tolerance>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn statistic(&self) -> Result<Statistic> {
        Ok(self.statistic.parse::<Statistic>()?)
    }

    /// The solid profile, `(ρ)` when `u` is absent.
    pub fn profile(&self) -> Result<SolidProfile> {
        let u = self.u.clone().unwrap_or_else(|| vec![self.rho]);
        Ok(SolidProfile::new(u, self.rho)?)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.rho >= 0.0 && self.rho.is_finite(),
            "rho must be finite and non-negative"
        );
        ensure!(!self.grid.is_empty(), "time grid is empty");
        ensure!(self.grid[0] >= 0.0, "time grid starts before zero");
        ensure!(
            self.grid.windows(2).all(|w| w[1] > w[0]),
            "time grid must be strictly increasing"
        );
        ensure!(
            self.grid.iter().all(|t| t.is_finite()),
            "time grid must be finite"
        );
        let needs_n = self.kind != ExperimentKind::FluidRelaxation && self.heights.is_none();
        if needs_n {
            ensure!(!self.n.is_empty(), "at least one n is required");
            ensure!(self.n.iter().all(|&n| n >= 1), "all n must be at least 1");
        }
        if self.kind != ExperimentKind::FluidRelaxation {
            ensure!(self.replicas >= 1, "replica count must be at least 1");
        }
        if let Some(h) = &self.heights {
            ensure!(!h.is_empty(), "explicit heights are empty");
            ensure!(
                self.kind == ExperimentKind::OracleValidation,
                "explicit heights are only used by oracle_validation"
            );
        }
        match self.kind {
            ExperimentKind::CutoffCurve => {
                self.profile()?;
                self.statistic()?;
                for s in &self.extra_statistics {
                    s.parse::<Statistic>()?;
                }
                ensure!(
                    self.epsilon > 0.0 && self.epsilon < 1.0,
                    "epsilon must lie in (0,1)"
                );
                ensure!(
                    self.replicas >= 2 && self.equilibrium_replicas >= 2,
                    "need at least two replicas"
                );
            }
            ExperimentKind::DissolutionTrack => {
                self.profile()?;
            }
            ExperimentKind::ChaosScaling | ExperimentKind::FluidRelaxation => {
                ensure!(self.dt > 0.0, "dt must be positive");
                if let Some(q) = &self.q0 {
                    ensure!(q.len() <= self.k_max + 1, "q0 is longer than k_max + 1");
                } else if self.rho.fract() != 0.0 || self.rho as usize > self.k_max {
                    bail!("q0 is required unless rho is an integer not above k_max");
                }
            }
            ExperimentKind::OracleValidation => {
                ensure!(
                    !self.m.is_empty() || self.heights.is_some(),
                    "oracle validation needs m values"
                );
            }
        }
        Ok(())
    }
}

/// Streams `[first, first + count)` of `master_seed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamRange {
    pub role: String,
    pub first: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lineage {
    pub master_seed: u64,
    pub streams: Vec<StreamRange>,
}

/// A plotted series; the full table lives in `file`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub file: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_constant: Option<f64>,
    /// Kind-specific scalar results for this curve.
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub lineage: Lineage,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Telemetry {
    pub wall_clock_seconds: f64,
    pub events: u64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub spec: ExperimentSpec,
    pub curves: Vec<Curve>,
    /// The numbers checked against the tolerance.
    pub headline: Vec<f64>,
    pub headline_description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    pub telemetry: Telemetry,
}

impl ExperimentResult {
    /// Parses a result file, rejecting other schema versions and seed lineage
    /// that does not match the spec.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let version = raw.get("schema_version").and_then(serde_json::Value::as_u64);
        ensure!(
            version == Some(SCHEMA_VERSION as u64),
            "schema version mismatch: expected {SCHEMA_VERSION}, found {version:?}"
        );
        let result: Self = serde_json::from_value(raw).map_err(|e| anyhow::anyhow!("schema error: {e}"))?;
        for c in &result.curves {
            ensure!(
                c.lineage.master_seed == result.spec.master_seed,
                "schema error: curve {} was produced by seed {}, spec says {}",
                c.label,
                c.lineage.master_seed,
                result.spec.master_seed
            );
        }
        result.spec.validate()?;
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"{"kind":"cutoff_curve","n":[100],"rho":1.0,"grid":[0.5,1.0],
        "replicas":4,"master_seed":7,"out_dir":"out"}"#;

    #[test]
    fn parses_with_defaults() {
        let s = ExperimentSpec::from_json(SPEC).unwrap();
        assert_eq!(s.kind, ExperimentKind::CutoffCurve);
        assert_eq!(s.epsilon, 0.25);
        assert_eq!(s.statistic().unwrap(), Statistic::MaxHeight);
        assert_eq!(s.profile().unwrap().u(), &[1.0]);
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = SPEC.replace("[0.5,1.0]", "[1.0,0.5]");
        assert!(ExperimentSpec::from_json(&bad).is_err());
        let bad = SPEC.replace("[100]", "[0]");
        assert!(ExperimentSpec::from_json(&bad).is_err());
        let bad = SPEC.replace("\"rho\":1.0", "\"rho\":1.0,\"u\":[0.2,0.9]");
        assert!(ExperimentSpec::from_json(&bad).is_err());
        let bad = SPEC.replace("\"master_seed\":7", "\"master_seed\":\"seven\"");
        assert!(ExperimentSpec::from_json(&bad).is_err());
    }

    #[test]
    fn tolerance_ranges() {
        let t = Tolerance {
            min: Some(1.0),
            max: Some(2.0),
        };
        assert!(t.accepts(1.5) && !t.accepts(0.5) && !t.accepts(f64::NAN));
        assert!(Tolerance::default().accepts(-3.0));
    }
}
