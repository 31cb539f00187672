//! Versioned JSON experiment configuration.

use std::path::{Path, PathBuf};

use cerlab::inference::SearchStrategy;
use cerlab::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sample,
    Orbits,
    MomentsCheck,
    Density,
    RhoCurve,
    Estimate,
    Posterior,
    Tv,
    Admissibility,
    ThresholdSweep,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::Orbits => "orbits",
            ExperimentKind::MomentsCheck => "moments-check",
            ExperimentKind::Density => "density",
            ExperimentKind::RhoCurve => "rho-curve",
            ExperimentKind::Estimate => "estimate",
            ExperimentKind::Posterior => "posterior",
            ExperimentKind::Tv => "tv",
            ExperimentKind::Admissibility => "admissibility",
            ExperimentKind::ThresholdSweep => "threshold-sweep",
        }
    }
}

/// Estimator settings; unset fields take the library defaults or are derived from a
/// `ρ̂` curve where the experiment computes one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_lambda_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<SearchStrategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Estimators run by the threshold sweep: `truth` (the hidden matching itself) and `map`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimators: Option<Vec<String>>,
}

/// Overrides for individual admissibility constants.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_set_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiny_component_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_len_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_budget: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelParams>,
    /// Sparsity exponent `α`, used where `p = n^{-α}` or admissibility constants are needed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<Vec<f64>>,
    pub replicates: usize,
    /// Replicates per point of the auxiliary `ρ̂` curve; defaults to `replicates`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_replicates: Option<usize>,
    pub seed: u64,
    /// Threshold sweep without an explicit `lambda_grid`: number of points placed on
    /// `[max(1.2, λ̂*−1), λ̂*+1.5]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Adds elapsed wall time to sweep records, which makes the output nondeterministic.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub record_wall_time: bool,
    #[serde(default, skip_serializing_if = "is_default")]
    pub estimator: EstimatorOverrides,
    #[serde(default, skip_serializing_if = "is_default")]
    pub admissibility: AdmissibilityOverrides,
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    *t == T::default()
}

impl ExperimentConfig {
    /// A minimal valid-shaped config; callers fill in what the experiment needs.
    pub fn new(experiment: ExperimentKind, replicates: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            version: CONFIG_VERSION,
            experiment,
            model: None,
            alpha: None,
            lambda_grid: None,
            n_grid: None,
            theta_grid: None,
            k_grid: None,
            p_grid: None,
            s_grid: None,
            replicates,
            rho_replicates: None,
            seed,
            sweep_points: None,
            output: None,
            record_wall_time: false,
            estimator: EstimatorOverrides::default(),
            admissibility: AdmissibilityOverrides::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig, HarnessError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.version != CONFIG_VERSION {
            return bad(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        if self.replicates == 0 {
            return bad("replicates must be ≥ 1".into());
        }
        if self.sweep_points == Some(0) {
            return bad("sweep_points must be ≥ 1".into());
        }
        if self.rho_replicates == Some(0) {
            return bad("rho_replicates must be ≥ 1".into());
        }
        let grids = [
            ("lambda_grid", self.lambda_grid.as_ref().map(Vec::len)),
            ("n_grid", self.n_grid.as_ref().map(Vec::len)),
            ("theta_grid", self.theta_grid.as_ref().map(Vec::len)),
            ("k_grid", self.k_grid.as_ref().map(Vec::len)),
            ("p_grid", self.p_grid.as_ref().map(Vec::len)),
            ("s_grid", self.s_grid.as_ref().map(Vec::len)),
        ];
        for (name, len) in grids {
            if len == Some(0) {
                return bad(format!("{name} must be nonempty"));
            }
        }
        if let Some(lg) = &self.lambda_grid {
            if lg.iter().any(|l| !l.is_finite() || *l <= 0.0) || lg.windows(2).any(|w| w[0] >= w[1]) {
                return bad("lambda_grid must be positive and strictly increasing".into());
            }
        }
        if let Some(model) = &self.model {
            model.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("alpha = {a} not in (0,1]"));
            }
        }
        if let Some(names) = &self.estimator.estimators {
            if let Some(bad_name) = names.iter().find(|n| !matches!(n.as_str(), "truth" | "map")) {
                return bad(format!("unknown estimator {bad_name:?} (expected truth or map)"));
            }
        }
        let required: &[(&str, bool)] = match self.experiment {
            ExperimentKind::Sample | ExperimentKind::Orbits | ExperimentKind::Estimate | ExperimentKind::Posterior => {
                &[("model", self.model.is_some())]
            }
            ExperimentKind::Tv => &[("model", self.model.is_some())],
            ExperimentKind::MomentsCheck => &[
                ("k_grid", self.k_grid.is_some()),
                ("p_grid", self.p_grid.is_some()),
                ("s_grid", self.s_grid.is_some()),
                ("theta_grid", self.theta_grid.is_some()),
            ],
            ExperimentKind::Density | ExperimentKind::RhoCurve => &[
                ("lambda_grid", self.lambda_grid.is_some()),
                ("n_grid", self.n_grid.is_some()),
            ],
            ExperimentKind::Admissibility => &[
                ("lambda_grid", self.lambda_grid.is_some()),
                ("n_grid", self.n_grid.is_some()),
                ("alpha", self.alpha.is_some()),
            ],
            ExperimentKind::ThresholdSweep => &[
                (
                    "lambda_grid or sweep_points",
                    self.lambda_grid.is_some() || self.sweep_points.is_some(),
                ),
                ("n_grid", self.n_grid.is_some()),
                ("alpha", self.alpha.is_some()),
            ],
        };
        if let Some((name, _)) = required.iter().find(|(_, present)| !present) {
            return bad(format!("experiment {} requires {name}", self.experiment.as_str()));
        }
        Ok(())
    }

    pub fn rho_replicates(&self) -> usize {
        self.rho_replicates.unwrap_or(self.replicates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentKind::ThresholdSweep, 5, 42);
        c.alpha = Some(0.5);
        c.lambda_grid = Some(vec![2.0, 3.0]);
        c.n_grid = Some(vec![100]);
        c.estimator.eta = Some(0.1);
        c
    }

    #[test]
    fn round_trips_through_json() {
        let c = sweep();
        c.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        let ok = sweep().to_json();
        let cases = [
            ok.replace("\"replicates\": 5", "\"replicates\": 0"),
            ok.replace("\"version\": 1", "\"version\": 2"),
            ok.replace("\"seed\": 42", "\"seed\": 42, \"colour\": 1"),
            ok.replace("[\n    100\n  ]", "[]"),
            ok.replace("\"alpha\": 0.5,", ""),
            ok.replace("\"eta\": 0.1", "\"eta\": 0.1, \"bogus\": true"),
        ];
        for text in cases {
            assert_ne!(text, ok);
            assert!(
                matches!(ExperimentConfig::from_json(&text), Err(HarnessError::Config(_))),
                "{text}"
            );
        }
    }
}
