//! Experiment configuration.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::processes::ProcessModel;

use super::estimate::{DEFAULT_BOOTSTRAP, MIN_POOLED};

/// Where the target variance `σ²` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma2Source {
    /// Exact when the model has a closed form, else the plug-in series with truncation 64.
    #[default]
    Auto,
    Exact,
    /// Plug-in autocovariance series truncated at `truncation`.
    Estimated { truncation: usize },
    Known(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeRange {
    pub min: f64,
    pub max: f64,
}

impl SlopeRange {
    pub fn around(center: f64, half: f64) -> Self {
        Self { min: center - half, max: center + half }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }
}

/// Slope windows checked by `report --check`; absent windows are not checked.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    /// Slope of `ln W₂` against `ln n`.
    #[serde(default)]
    pub w2_slope: Option<SlopeRange>,
    /// Slope of `ln E W₂²(· | ξ₀)` (Monte Carlo).
    #[serde(default)]
    pub cond_w2_slope: Option<SlopeRange>,
    /// Slope of the exact conditional cost on the oracle grid.
    #[serde(default)]
    pub oracle_cond_w2_slope: Option<SlopeRange>,
    /// Slope of `ln Δ_n`.
    #[serde(default)]
    pub be_slope: Option<SlopeRange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalConfig {
    pub states: usize,
    pub paths: usize,
}

impl Default for ConditionalConfig {
    fn default() -> Self {
        Self { states: 64, paths: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    #[serde(default = "default_lags")]
    pub lags: Vec<usize>,
    #[serde(default = "default_window")]
    pub window: usize,
    /// Inner and outer sample sizes of the Monte Carlo `θ`.
    #[serde(default = "default_mc_states")]
    pub mc_states: usize,
    #[serde(default = "default_mc_paths")]
    pub mc_paths: usize,
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        Self {
            lags: default_lags(),
            window: default_window(),
            mc_states: default_mc_states(),
            mc_paths: default_mc_paths(),
        }
    }
}

fn default_lags() -> Vec<usize> {
    (1..=8).collect()
}
fn default_window() -> usize {
    4
}
fn default_mc_states() -> usize {
    32
}
fn default_mc_paths() -> usize {
    2000
}
fn default_replicates() -> usize {
    1
}
fn default_pooled() -> usize {
    100_000
}
fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP
}
fn default_outputs() -> PathBuf {
    PathBuf::from("report")
}
fn default_sigma2_path() -> usize {
    1 << 22
}
fn default_oracle_grid() -> Vec<usize> {
    (4..=10).map(|e| 1usize << e).collect()
}
fn default_quantile_levels() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}
fn default_superquantile_levels() -> Vec<f64> {
    vec![0.01, 0.05, 0.1, 0.25, 0.5, 1.0]
}

/// JSON document describing one experiment battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ProcessModel,
    pub n_grid: Vec<usize>,
    /// Independent repetitions of each pooled estimate.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Paths per grid point.
    #[serde(default = "default_pooled")]
    pub pooled_samples: usize,
    #[serde(default)]
    pub sigma2_source: Sigma2Source,
    /// Path length of the plug-in variance estimate.
    #[serde(default = "default_sigma2_path")]
    pub sigma2_path_length: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default)]
    pub conditional: ConditionalConfig,
    #[serde(default = "default_oracle_grid")]
    pub oracle_grid: Vec<usize>,
    #[serde(default = "default_quantile_levels")]
    pub quantile_levels: Vec<f64>,
    #[serde(default = "default_superquantile_levels")]
    pub superquantile_levels: Vec<f64>,
    #[serde(default)]
    pub coefficients: CoefficientConfig,
    #[serde(default)]
    pub checks: Option<Checks>,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn strictly_increasing(name: &str, grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return config_err(format!("{name} is empty"));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return config_err(format!("{name} must be strictly increasing positive integers"));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Config with defaults for everything but the model and grid.
    pub fn new(model: ProcessModel, n_grid: Vec<usize>) -> Self {
        Self {
            model,
            n_grid,
            replicates: default_replicates(),
            pooled_samples: default_pooled(),
            sigma2_source: Sigma2Source::Auto,
            sigma2_path_length: default_sigma2_path(),
            seed: 0,
            outputs: default_outputs(),
            bootstrap: default_bootstrap(),
            conditional: ConditionalConfig::default(),
            oracle_grid: default_oracle_grid(),
            quantile_levels: default_quantile_levels(),
            superquantile_levels: default_superquantile_levels(),
            coefficients: CoefficientConfig::default(),
            checks: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        strictly_increasing("n_grid", &self.n_grid)?;
        strictly_increasing("oracle_grid", &self.oracle_grid)?;
        if self.replicates == 0 {
            return config_err("replicates must be >= 1");
        }
        if self.pooled_samples < MIN_POOLED {
            return config_err(format!("pooled_samples must be >= {MIN_POOLED}"));
        }
        if self.conditional.paths < MIN_POOLED || self.conditional.states < 2 {
            return config_err(format!("conditional needs states >= 2 and paths >= {MIN_POOLED}"));
        }
        if self.quantile_levels.iter().any(|u| !(*u > 0.0 && *u < 1.0)) {
            return config_err("quantile_levels must lie in (0, 1)");
        }
        if self.superquantile_levels.iter().any(|u| !(*u > 0.0 && *u <= 1.0)) {
            return config_err("superquantile_levels must lie in (0, 1]");
        }
        match self.sigma2_source {
            Sigma2Source::Known(v) if !(v >= 0.0 && v.is_finite()) => return config_err("known sigma2 must be >= 0"),
            Sigma2Source::Estimated { truncation: 0 } => return config_err("estimated sigma2 needs truncation >= 1"),
            _ => {}
        }
        if self.sigma2_path_length < 1000 {
            return config_err("sigma2_path_length must be >= 1000");
        }
        if self.coefficients.lags.contains(&0) || self.coefficients.window == 0 {
            return config_err("coefficient lags and window must be >= 1");
        }
        self.model.sampler().map_err(|e| Error::Config(format!("model rejected: {e}")))?;
        Ok(())
    }

    /// Explicit checks, or the default windows for the model.
    pub fn effective_checks(&self) -> Checks {
        self.checks.unwrap_or_else(|| default_checks(&self.model))
    }
}

/// Slope windows: `−1/2` for `W₂` (`≤ −0.35` for the interval map), `−1`
/// for the exact conditional cost.
pub fn default_checks(model: &ProcessModel) -> Checks {
    let w2 = match model {
        ProcessModel::LsvMap(_) => SlopeRange { min: f64::NEG_INFINITY, max: -0.35 },
        _ => SlopeRange::around(-0.5, 0.15),
    };
    let oracle = matches!(model, ProcessModel::FiniteMarkov(_)).then(|| SlopeRange::around(-1.0, 0.15));
    Checks { w2_slope: Some(w2), cond_w2_slope: None, oracle_cond_w2_slope: oracle, be_slope: None }
}
