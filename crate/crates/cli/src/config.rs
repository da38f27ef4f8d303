//! One settings layer: built-in defaults, then a TOML file, then flags.

use std::path::Path;

use graphpot::exhaustion::SolverConfig;
use graphpot::heat::{CompletenessConfig, QuadratureConfig};
use graphpot::potential::ClassifierConfig;
use graphpot::verification::VerifyConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitSettings {
    /// Cauchy tolerance for sequences not governed by the classifier.
    pub tol: f64,
    /// Divergence threshold for increasing sequences.
    pub threshold: f64,
}

impl Default for LimitSettings {
    fn default() -> Self {
        LimitSettings { tol: 1e-6, threshold: 1e6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExhaustionSettings {
    pub start_radius: usize,
    pub max_vertices: usize,
}

impl Default for ExhaustionSettings {
    fn default() -> Self {
        ExhaustionSettings { start_radius: 5, max_vertices: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkSettings {
    pub steps: usize,
    pub trials: u64,
    pub seed: u64,
    /// Step cap for the visit-count series.
    pub series_steps: usize,
}

impl Default for WalkSettings {
    fn default() -> Self {
        WalkSettings { steps: 1000, trials: 100_000, seed: 1, series_steps: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub solver: SolverConfig,
    pub limits: LimitSettings,
    pub exhaustion: ExhaustionSettings,
    /// Its `solver` field is ignored in favour of `[solver]`.
    pub classifier: ClassifierConfig,
    /// Its `solver` field is ignored in favour of `[solver]`.
    pub completeness: CompletenessConfig,
    pub quadrature: QuadratureConfig,
    pub walk: WalkSettings,
    pub verify: VerifyConfig,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Settings, CliError> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Propagates `[solver]` into the nested configurations.
    pub fn finish(mut self) -> Settings {
        self.classifier.solver = self.solver;
        self.completeness.solver = self.solver;
        self
    }
}
