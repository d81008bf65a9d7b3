//! Goodness-of-fit metrics for regression predictions.

use crate::error::{Error, Result};

/// The three metrics reported for every fitted model. `mape` is a fraction
/// (0.05 = 5 %), not a percentage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub r_squared: f64,
    pub mse: f64,
    pub mape: f64,
}

/// Computes mean squared error, mean absolute percentage error, and the
/// coefficient of determination of `y_pred` against `y_true`.
///
/// MAPE divides by the ground truth, so any zero in `y_true` is an error
/// naming the offending index — skipping such points silently would bias
/// the report. A constant `y_true` leaves R² undefined unless the
/// predictions are exact (then R² = 1 by convention).
pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<MetricReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput { context: "metrics" });
    }
    for (i, value) in y_true.iter().chain(y_pred.iter()).enumerate() {
        if !value.is_finite() {
            return Err(Error::InvalidParameter {
                name: if i < y_true.len() { "y_true" } else { "y_pred" },
                message: "all values must be finite".to_string(),
            });
        }
    }

    let n = y_true.len() as f64;
    let mut ss_res = 0.0;
    let mut abs_pct = 0.0;
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        if t == 0.0 {
            return Err(Error::ZeroGroundTruth { index: i });
        }
        ss_res += (t - p) * (t - p);
        abs_pct += (t - p).abs() / t.abs();
    }
    let mse = ss_res / n;
    let mape = abs_pct / n;

    let mean = y_true.iter().sum::<f64>() / n;
    let ss_tot: f64 = y_true.iter().map(|&t| (t - mean) * (t - mean)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            return Err(Error::DegenerateFit {
                context: "r_squared is undefined: constant ground truth with imperfect predictions"
                    .to_string(),
            });
        }
    } else {
        1.0 - ss_res / ss_tot
    };

    Ok(MetricReport {
        r_squared,
        mse,
        mape,
    })
}
