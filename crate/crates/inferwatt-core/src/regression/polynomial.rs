//! Univariate polynomial least squares via the normal equations.

use crate::error::{Error, Result};

use super::solve::solve;

/// Least-squares polynomial `y = Σ coefficients[i] · xⁱ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialModel {
    /// Index i holds the coefficient of xⁱ; length is degree + 1.
    pub coefficients: Vec<f64>,
}

impl PolynomialModel {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn predict(&self, x: f64) -> f64 {
        // Horner evaluation, highest power first.
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Fits a degree-`degree` polynomial minimizing Σ(y − p(x))², solving the
/// normal equations `XᵀX a = Xᵀy` with partial pivoting. Small degrees on
/// modest inputs (the intended regime) are well within the method's
/// numerical comfort zone.
pub fn fit_polynomial(points: &[(f64, f64)], degree: usize) -> Result<PolynomialModel> {
    if degree < 1 {
        return Err(Error::InvalidParameter {
            name: "degree",
            message: "polynomial degree must be at least 1".to_string(),
        });
    }
    let needed = degree + 1;
    if points.len() < needed {
        return Err(Error::InsufficientData {
            context: "polynomial fit",
            needed,
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
    let mut xs: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < needed {
        return Err(Error::DegenerateFit {
            context: format!(
                "polynomial fit: degree {} needs {} distinct x values, got {}",
                degree,
                needed,
                xs.len()
            ),
        });
    }

    // Normal equations: entry (i, j) of XᵀX is Σ x^(i+j); entry i of Xᵀy
    // is Σ y·xⁱ.
    let m = degree + 1;
    let mut power_sums = vec![0.0; 2 * degree + 1];
    let mut rhs = vec![0.0; m];
    for &(x, y) in points {
        let mut p = 1.0;
        for (i, sum) in power_sums.iter_mut().enumerate() {
            *sum += p;
            if i < m {
                rhs[i] += y * p;
            }
            p *= x;
        }
    }
    let matrix: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| power_sums[i + j]).collect())
        .collect();

    let coefficients = solve(matrix, rhs).ok_or_else(|| Error::DegenerateFit {
        context: "polynomial fit: normal equations are singular".to_string(),
    })?;
    Ok(PolynomialModel { coefficients })
}

/// Leave-one-out cross-validated R²: each point is predicted by a model
/// fitted on all the others. A small-sample guard on overfitting when
/// choosing the polynomial degree.
pub fn leave_one_out_r_squared(points: &[(f64, f64)], degree: usize) -> Result<f64> {
    // Every fold drops one point and still needs degree + 1 of them.
    if points.len() < degree + 2 {
        return Err(Error::InsufficientData {
            context: "leave-one-out cross-validation",
            needed: degree + 2,
            got: points.len(),
        });
    }
    let mut ss_res = 0.0;
    for i in 0..points.len() {
        let rest: Vec<(f64, f64)> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &p)| p)
            .collect();
        let model = fit_polynomial(&rest, degree)?;
        let (x, y) = points[i];
        let r = y - model.predict(x);
        ss_res += r * r;
    }
    let mean = points.iter().map(|&(_, y)| y).sum::<f64>() / points.len() as f64;
    let ss_tot: f64 = points.iter().map(|&(_, y)| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateFit {
            context: "leave-one-out R²: constant targets".to_string(),
        });
    }
    Ok(1.0 - ss_res / ss_tot)
}
