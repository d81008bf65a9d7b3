//! Layered configuration: command-line flags override the config file,
//! the config file overrides built-in defaults.
//!
//! The config file is TOML, located via `--config` or the
//! `INFERWATT_CONFIG` environment variable. Every key is optional.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

/// Contents of the optional config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Directory holding the sample CSVs.
    pub data_dir: Option<PathBuf>,
    /// Directory holding (or receiving) the trained model files.
    pub models_dir: Option<PathBuf>,
    /// Hardware database JSON; the built-in table when omitted.
    pub hardware_db: Option<PathBuf>,
    /// Carbon-intensity database JSON; the built-in table when omitted.
    pub rci_db: Option<PathBuf>,
    /// Leaderboard CSV used by `validate`.
    pub leaderboard: Option<PathBuf>,
    /// Training seed.
    pub seed: Option<u64>,
    /// Default output format (`table` or `json`).
    pub format: Option<String>,
    /// Default accelerator utilization for estimates.
    pub utilization: Option<f64>,
    /// Default datacenter PUE for estimates.
    pub pue: Option<f64>,
    /// Default grid carbon intensity for estimates, g CO₂ per kWh.
    pub rci_g_per_kwh: Option<f64>,
    /// Default region code, resolved through the carbon-intensity
    /// database when no explicit intensity is given.
    pub region: Option<String>,
    /// Default hardware name for estimates.
    pub hardware: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Failure::usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Loads the file named by `--config` when given, otherwise an empty
    /// overlay. (The flag itself also honors `INFERWATT_CONFIG`.)
    pub fn resolve(path: Option<&Path>) -> Result<Self, Failure> {
        match path {
            Some(path) => FileConfig::load(path),
            None => Ok(FileConfig::default()),
        }
    }
}

/// First Some wins: flag, then file, then the built-in fallback.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, fallback: T) -> T {
    flag.or(file).unwrap_or(fallback)
}

/// Like [`pick`] without a fallback.
pub fn pick_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}
