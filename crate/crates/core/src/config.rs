//! Scenario files: a model plus everything needed to run it.
//!
//! ```json
//! {
//!   "name": "ex5_1",
//!   "model": {
//!     "params": {"a": 10, "b": 1, "b1": 1, "c": 1, "d": 1, "d1": 1, "r": 1, "alpha": 1, "tau": 1, "delta": 1},
//!     "f": {"kind": "bilinear"},
//!     "V": {"kind": "linear", "k": 1},
//!     "P": {"kind": "linear", "k": 1}
//!   },
//!   "target": "endemic",
//!   "history": {"constant": {"x": 1, "y": 1, "z": 1}},
//!   "horizon": 100,
//!   "sweep": [[0, 0], [1, 1]],
//!   "outputs": ["report"]
//! }
//! ```
//!
//! A bare model file (just `params`, `f`, `V`, `P`) is also accepted and gets
//! default run settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::integrator::{default_step, HistorySpec};
use crate::model::{EquilibriumKind, ModelSpec, State};

pub const DEFAULT_HORIZON: f64 = 100.0;

/// Artifacts a run may emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    Report,
    Timeseries,
    SweepTable,
    Plot,
}

/// Documented reference values for a scenario, compared against computed
/// values in reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceValues {
    /// Equilibria stated for the system.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equilibria: Vec<State>,
    /// Delay-free characteristic polynomial, highest degree first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_poly: Option<[f64; 4]>,
    /// Pseudo-delay cubic coefficients, highest degree first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pseudo_delay_cubic: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_plus: Option<f64>,
    /// Free-form notes on the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Model plus run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: ModelSpec,
    /// Equilibrium analyzed by default (endemic when one exists otherwise).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<EquilibriumKind>,
    pub history: HistorySpec,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Integration step; `None` selects `min(0.01, smallest positive delay / 20)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Delay grid as `(tau, delta)` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub outputs: Vec<Artifact>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceValues>,
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON
}

impl ScenarioConfig {
    /// Wraps a bare model with default settings: constant history `(1, 1, 1)`,
    /// horizon 100, default step.
    pub fn from_model(model: ModelSpec) -> Self {
        ScenarioConfig {
            name: None,
            model,
            target: None,
            history: HistorySpec::Constant(State::new(1.0, 1.0, 1.0)),
            horizon: DEFAULT_HORIZON,
            step: None,
            sweep: None,
            outputs: vec![Artifact::Report],
            reference: None,
        }
    }

    /// Parses a scenario or a bare model file.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let cfg = if value.get("model").is_some() {
            serde_json::from_value::<ScenarioConfig>(value).map_err(|e| ConfigError::Parse(e.to_string()))?
        } else {
            let model = serde_json::from_value::<ModelSpec>(value).map_err(|e| ConfigError::Parse(e.to_string()))?;
            ScenarioConfig::from_model(model)
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ConfigError::Invalid(format!("field `horizon`: must be positive, got {}", self.horizon)));
        }
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(ConfigError::Invalid(format!("field `step`: must be positive, got {h}")));
            }
        }
        if let Some(grid) = &self.sweep {
            if grid.is_empty() {
                return Err(ConfigError::Invalid("field `sweep`: grid is empty".into()));
            }
            if grid.iter().any(|(t, d)| !(t.is_finite() && d.is_finite() && *t >= 0.0 && *d >= 0.0)) {
                return Err(ConfigError::Invalid("field `sweep`: delays must be finite and nonnegative".into()));
            }
        }
        self.history
            .validate(self.model.params().max_delay())
            .map_err(|e| ConfigError::Invalid(format!("field `history`: {e}")))?;
        Ok(())
    }

    /// Effective step for the model's own delays.
    pub fn step_for(&self, model: &ModelSpec) -> f64 {
        self.step.unwrap_or_else(|| default_step(model))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn dumped_config_reloads_identically() {
        for name in presets::NAMES {
            let cfg = presets::load(name).unwrap();
            let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg, "{name}");
        }
    }

    #[test]
    fn bare_model_file_gets_defaults() {
        let json = r#"{"params": {"a": 10, "b": 1, "b1": 1, "c": 1, "d": 1, "d1": 1, "r": 1, "alpha": 1},
                       "f": {"kind": "bilinear"}, "V": {"kind": "linear", "k": 1}, "P": {"kind": "linear", "k": 1}}"#;
        let cfg = ScenarioConfig::from_json(json).unwrap();
        assert_eq!(cfg.horizon, DEFAULT_HORIZON);
        assert_eq!(cfg.history, HistorySpec::Constant(State::new(1.0, 1.0, 1.0)));
    }

    #[test]
    fn parse_errors_name_the_field() {
        let json = r#"{"params": {"a": 10, "b": 1, "b1": 1, "c": 1, "d": 1, "d1": 1, "r": 1},
                       "f": {"kind": "bilinear"}, "V": {"kind": "linear", "k": 1}, "P": {"kind": "linear", "k": 1}}"#;
        let err = ScenarioConfig::from_json(json).unwrap_err().to_string();
        assert!(err.contains("alpha"), "{err}");

        let mut cfg = presets::load("ex5_1").unwrap();
        cfg.horizon = -1.0;
        let err = ScenarioConfig::from_json(&cfg.to_json()).unwrap_err().to_string();
        assert!(err.contains("horizon"), "{err}");
    }
}
