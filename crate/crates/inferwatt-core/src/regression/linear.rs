//! One-dimensional ordinary least squares.

use crate::error::{Error, Result};

/// Best-fit line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Fits the OLS minimizer of Σ(y − (slope·x + intercept))² in closed form,
/// using centered sums for numerical stability.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<LinearModel> {
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            context: "linear fit",
            needed: 2,
            got: points.len(),
        });
    }
    for &(x, y) in points {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "points",
                message: "all coordinates must be finite".to_string(),
            });
        }
    }

    let n = points.len() as f64;
    let mean_x = points.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut s_xy = 0.0;
    let mut s_xx = 0.0;
    for &(x, y) in points {
        s_xy += (x - mean_x) * (y - mean_y);
        s_xx += (x - mean_x) * (x - mean_x);
    }
    if s_xx == 0.0 {
        return Err(Error::DegenerateFit {
            context: "linear fit: all x values are identical".to_string(),
        });
    }

    let slope = s_xy / s_xx;
    let intercept = mean_y - slope * mean_x;
    Ok(LinearModel { slope, intercept })
}
