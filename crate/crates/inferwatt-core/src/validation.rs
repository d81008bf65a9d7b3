//! Back-to-back comparison of estimator output against published
//! leaderboard measurements.
//!
//! Leaderboard submissions report an end-to-end latency for a fixed decode
//! length and an energy efficiency in tokens per kWh. Those are first
//! rescaled to the workload the estimator is asked about, then each entry
//! is estimated and scored by absolute percentage error. The aggregate is
//! the mean APE per column — the same MAPE the regression metrics compute.

use serde::{Deserialize, Serialize};

use crate::dataset::{HardwareDb, LeaderboardEntry, RciDb};
use crate::error::{Error, Result};
use crate::estimator::{estimate, DeviceRounding, EstimateRequest, ModelBundle};

/// Workload and environment the validation run assumes for every entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Prompt length the estimator is asked about.
    pub prompt_tokens: u32,
    /// Output length the estimator is asked about.
    pub output_tokens: u32,
    /// Decode length the leaderboard's latency column was measured at.
    pub leaderboard_decode_tokens: u32,
    pub hardware_name: Option<String>,
    pub utilization: Option<f64>,
    pub pue: Option<f64>,
    pub rci_g_per_kwh: Option<f64>,
    pub device_rounding: DeviceRounding,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            prompt_tokens: 192,
            output_tokens: 250,
            leaderboard_decode_tokens: 256,
            hardware_name: None,
            utilization: None,
            pue: None,
            rci_g_per_kwh: None,
            device_rounding: DeviceRounding::default(),
        }
    }
}

impl ValidationConfig {
    fn request(&self, model_params: f64) -> EstimateRequest {
        EstimateRequest {
            model_params,
            prompt_tokens: self.prompt_tokens,
            output_tokens: self.output_tokens,
            hardware_name: self.hardware_name.clone(),
            utilization: self.utilization,
            pue: self.pue,
            rci_g_per_kwh: self.rci_g_per_kwh,
            device_override: None,
            device_rounding: self.device_rounding,
        }
    }
}

/// One validated entry: measured truth, prediction, and per-column APEs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub model_name: String,
    pub model_params_b: f64,
    pub true_latency_s: f64,
    pub pred_latency_s: f64,
    pub true_energy_kwh: f64,
    pub pred_energy_kwh: f64,
    pub latency_ape: f64,
    pub energy_ape: f64,
}

impl ValidationRow {
    /// Builds a row, computing both APEs. Ground truth must be positive —
    /// a percentage error against zero is undefined.
    pub fn new(
        model_name: &str,
        model_params_b: f64,
        true_latency_s: f64,
        pred_latency_s: f64,
        true_energy_kwh: f64,
        pred_energy_kwh: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("true_latency_s", true_latency_s),
            ("true_energy_kwh", true_energy_kwh),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "ground_truth",
                    message: format!("{name} must be positive and finite, got {value}"),
                });
            }
        }
        for (name, value) in [
            ("pred_latency_s", pred_latency_s),
            ("pred_energy_kwh", pred_energy_kwh),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "prediction",
                    message: format!("{name} must be finite, got {value}"),
                });
            }
        }
        Ok(ValidationRow {
            model_name: model_name.to_string(),
            model_params_b,
            true_latency_s,
            pred_latency_s,
            true_energy_kwh,
            pred_energy_kwh,
            latency_ape: ((pred_latency_s - true_latency_s) / true_latency_s).abs(),
            energy_ape: ((pred_energy_kwh - true_energy_kwh) / true_energy_kwh).abs(),
        })
    }
}

/// An entry the run could not score, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSkip {
    /// 0-based position in the input entry list.
    pub index: usize,
    pub model_name: String,
    pub message: String,
}

/// Scored rows plus aggregate errors. Aggregates are `None` when no row
/// survived — an empty mean would be misleading, not zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub skipped: Vec<ValidationSkip>,
    pub latency_mape: Option<f64>,
    pub energy_mape: Option<f64>,
}

impl ValidationReport {
    /// Assembles a report, recomputing the aggregates from the rows.
    pub fn from_rows(rows: Vec<ValidationRow>, skipped: Vec<ValidationSkip>) -> Self {
        let mean = |select: fn(&ValidationRow) -> f64| {
            if rows.is_empty() {
                None
            } else {
                Some(rows.iter().map(select).sum::<f64>() / rows.len() as f64)
            }
        };
        let latency_mape = mean(|r| r.latency_ape);
        let energy_mape = mean(|r| r.energy_ape);
        ValidationReport {
            rows,
            skipped,
            latency_mape,
            energy_mape,
        }
    }

    /// Number of rows that were scored.
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// True when the run is unusable as-is: rows were skipped, or nothing
    /// was scored at all.
    pub fn has_errors(&self) -> bool {
        !self.skipped.is_empty() || self.rows.is_empty()
    }
}

/// Rescales a leaderboard entry's measurements to the validation workload.
///
/// The reported latency covers `leaderboard_decode_tokens` of decoding;
/// per-token scaling converts it to `output_tokens` worth. The energy
/// column is an efficiency, so the workload's energy is simply
/// `output_tokens / tokens_per_kwh`. Returns (latency seconds, energy kWh).
pub fn scale_ground_truth(
    entry: &LeaderboardEntry,
    config: &ValidationConfig,
) -> Result<(f64, f64)> {
    if config.leaderboard_decode_tokens == 0 {
        return Err(Error::InvalidParameter {
            name: "leaderboard_decode_tokens",
            message: "must be at least 1".to_string(),
        });
    }
    if config.output_tokens == 0 {
        return Err(Error::InvalidParameter {
            name: "output_tokens",
            message: "must be at least 1".to_string(),
        });
    }
    if !(entry.tokens_per_kwh.is_finite() && entry.tokens_per_kwh > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tokens_per_kwh",
            message: format!(
                "`{}` for `{}` must be positive",
                entry.tokens_per_kwh, entry.model_name
            ),
        });
    }
    if !(entry.e2e_latency_s.is_finite() && entry.e2e_latency_s > 0.0) {
        return Err(Error::InvalidParameter {
            name: "e2e_latency_s",
            message: format!(
                "`{}` for `{}` must be positive",
                entry.e2e_latency_s, entry.model_name
            ),
        });
    }
    let latency_s = entry.e2e_latency_s / config.leaderboard_decode_tokens as f64
        * config.output_tokens as f64;
    let energy_kwh = config.output_tokens as f64 / entry.tokens_per_kwh;
    Ok((latency_s, energy_kwh))
}

/// Scores every entry against the estimator. Entries that cannot be
/// scored are skipped with a diagnostic rather than aborting the run;
/// surviving rows keep the input order.
pub fn run_validation(
    entries: &[LeaderboardEntry],
    config: &ValidationConfig,
    bundle: &ModelBundle,
    hardware_db: &HardwareDb,
    rci_db: &RciDb,
) -> Result<ValidationReport> {
    let mut rows = Vec::with_capacity(entries.len());
    let mut skipped = Vec::new();
    for (index, entry) in entries.iter().enumerate() {
        let skip = |message: String, skipped: &mut Vec<ValidationSkip>| {
            skipped.push(ValidationSkip {
                index,
                model_name: entry.model_name.clone(),
                message,
            });
        };
        let (true_latency_s, true_energy_kwh) = match scale_ground_truth(entry, config) {
            Ok(truth) => truth,
            Err(err) => {
                skip(err.to_string(), &mut skipped);
                continue;
            }
        };
        let request = config.request(entry.model_params_b);
        let result = match estimate(&request, bundle, hardware_db, rci_db) {
            Ok(result) => result,
            Err(err) => {
                skip(err.to_string(), &mut skipped);
                continue;
            }
        };
        match ValidationRow::new(
            &entry.model_name,
            entry.model_params_b,
            true_latency_s,
            result.e2e_latency_s,
            true_energy_kwh,
            result.energy_kwh,
        ) {
            Ok(row) => rows.push(row),
            Err(err) => skip(err.to_string(), &mut skipped),
        }
    }
    Ok(ValidationReport::from_rows(rows, skipped))
}
