//! Scenario configuration files.
//!
//! Scenarios are described by a flat TOML file: scalar keys at the top
//! level, one optional `[ran_a]` / `[ran_b]` table per network. Every key
//! is optional — missing keys take the reference-experiment defaults — and
//! unknown keys are errors. The full grammar:
//!
//! ```toml
//! name = "reference"          # scenario label (string)
//! base_seed = 42              # u64 master seed
//! pool_sizes = [20, 60, 100]  # nonnegative integers
//! gamma_step = 0.01           # must divide [0, 1] exactly
//! n_realizations = 1000       # >= 2
//! trace_length = 1000         # >= 1
//! confidence_level = 0.95     # in (0, 1)
//! modes = ["mean-lower", "max-lower"]   # also mean-upper / max-upper
//!
//! [ran_a]                     # demand process of network A
//! mean_level = 30.0
//! ar_coeffs = [0.75]
//! ma_coeffs = []
//! innovation_stddev = 2.99186...   # defaults keep stationary variance 20.46
//! burn_in = 200
//!
//! [ran_b]                     # same keys; defaults target mean 50.0
//! ```
//!
//! [`to_toml_string`] writes a complete echo of a config in this grammar;
//! parsing the echo yields the original config exactly.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::demand::{ArmaParams, NetworkId};
use crate::harness::ScenarioConfig;
use crate::stats::StatisticSelector;

/// Errors from config reading, parsing, and validation.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config validation error: {0}")]
    Validation(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    base_seed: Option<u64>,
    pool_sizes: Option<Vec<u32>>,
    gamma_step: Option<f64>,
    n_realizations: Option<usize>,
    trace_length: Option<usize>,
    confidence_level: Option<f64>,
    modes: Option<Vec<String>>,
    ran_a: Option<ArmaFile>,
    ran_b: Option<ArmaFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArmaFile {
    mean_level: Option<f64>,
    ar_coeffs: Option<Vec<f64>>,
    ma_coeffs: Option<Vec<f64>>,
    innovation_stddev: Option<f64>,
    burn_in: Option<usize>,
}

impl ArmaFile {
    /// Build validated parameters, taking per-network defaults for missing keys.
    fn build(self, network: NetworkId) -> Result<ArmaParams, ConfigError> {
        let defaults = match network {
            NetworkId::RanA => ArmaParams::default_ran_a(),
            NetworkId::RanB => ArmaParams::default_ran_b(),
        };
        ArmaParams::new(
            self.mean_level.unwrap_or(defaults.mean_level()),
            self.ar_coeffs
                .unwrap_or_else(|| defaults.ar_coeffs().to_vec()),
            self.ma_coeffs
                .unwrap_or_else(|| defaults.ma_coeffs().to_vec()),
            self.innovation_stddev
                .unwrap_or(defaults.innovation_stddev()),
            self.burn_in.unwrap_or(defaults.burn_in()),
        )
        .map_err(|e| ConfigError::Validation(format!("[{network}]: {e}")))
    }
}

/// Parse and validate a scenario file from disk.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            ConfigError::FileNotFound(path.to_path_buf())
        } else {
            ConfigError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_config_str(&text)
}

/// Parse and validate a scenario from TOML text. Parse errors carry the
/// offending line and column; validation errors name the violated invariant.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let reference = ScenarioConfig::reference();

    let modes = match file.modes {
        None => reference.modes,
        Some(tokens) => tokens
            .iter()
            .map(|t| t.parse::<StatisticSelector>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(ConfigError::Validation)?,
    };

    let config = ScenarioConfig {
        name: file.name.unwrap_or(reference.name),
        base_seed: file.base_seed.unwrap_or(reference.base_seed),
        pool_sizes: file.pool_sizes.unwrap_or(reference.pool_sizes),
        gamma_step: file.gamma_step.unwrap_or(reference.gamma_step),
        n_realizations: file.n_realizations.unwrap_or(reference.n_realizations),
        trace_length: file.trace_length.unwrap_or(reference.trace_length),
        confidence_level: file.confidence_level.unwrap_or(reference.confidence_level),
        modes,
        ran_a: file.ran_a.unwrap_or_default().build(NetworkId::RanA)?,
        ran_b: file.ran_b.unwrap_or_default().build(NetworkId::RanB)?,
    };
    config
        .validate()
        .map_err(|e| ConfigError::Validation(e.to_string()))?;
    Ok(config)
}

/// Serialize a config echo in the scenario-file grammar.
pub fn to_toml_string(config: &ScenarioConfig) -> String {
    toml::to_string(config).expect("scenario config serializes to TOML")
}
