//! Multivariate least squares on raw or polynomially expanded features.
//!
//! The public model types stay one-dimensional because that is all the
//! estimation chain needs; the algorithm comparison, however, fits linear
//! and polynomial baselines on the 2-D encoding feature vector, and those
//! baselines live here, crate-private.

use crate::error::{Error, Result};

use super::solve::solve;

/// `y = coefficients[0] + Σ coefficients[1 + i] · x[i]` over some feature
/// vector (possibly an expansion of the raw one).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MultilinearModel {
    pub coefficients: Vec<f64>,
}

impl MultilinearModel {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() + 1 != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coefficients.len() - 1,
                got: features.len(),
            });
        }
        Ok(self.coefficients[0]
            + self.coefficients[1..]
                .iter()
                .zip(features)
                .map(|(c, x)| c * x)
                .sum::<f64>())
    }
}

pub(crate) fn fit_multilinear(features: &[Vec<f64>], targets: &[f64]) -> Result<MultilinearModel> {
    if features.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: targets.len(),
        });
    }
    let d = match features.first() {
        Some(row) => row.len(),
        None => {
            return Err(Error::EmptyInput {
                context: "multilinear fit",
            })
        }
    };
    if features.len() < d + 1 {
        return Err(Error::InsufficientData {
            context: "multilinear fit",
            needed: d + 1,
            got: features.len(),
        });
    }
    for row in features {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
    }

    // Normal equations over the design matrix with a leading 1s column.
    let m = d + 1;
    let mut matrix = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for (row, &y) in features.iter().zip(targets) {
        let mut design = Vec::with_capacity(m);
        design.push(1.0);
        design.extend_from_slice(row);
        for i in 0..m {
            rhs[i] += y * design[i];
            for j in 0..m {
                matrix[i][j] += design[i] * design[j];
            }
        }
    }

    let coefficients = solve(matrix, rhs).ok_or_else(|| Error::DegenerateFit {
        context: "multilinear fit: normal equations are singular".to_string(),
    })?;
    Ok(MultilinearModel { coefficients })
}

/// Expands a feature vector into all monomials of total degree 1..=degree,
/// in a fixed deterministic order (ascending total degree, then
/// lexicographic exponents). The constant term is not included; the fit
/// supplies its own intercept.
pub(crate) fn polynomial_features(features: &[f64], degree: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut exponents = vec![0usize; features.len()];
    for total in 1..=degree {
        emit_monomials(features, total, 0, total, &mut exponents, &mut out);
    }
    out
}

fn emit_monomials(
    features: &[f64],
    total: usize,
    position: usize,
    remaining: usize,
    exponents: &mut Vec<usize>,
    out: &mut Vec<f64>,
) {
    if position == features.len() {
        if remaining == 0 {
            let value = features
                .iter()
                .zip(exponents.iter())
                .map(|(&x, &e)| x.powi(e as i32))
                .product();
            out.push(value);
        }
        return;
    }
    // Highest exponent on the earliest feature first: for degree 2 over
    // (a, b) the order is a², ab, b².
    for e in (0..=remaining).rev() {
        exponents[position] = e;
        emit_monomials(features, total, position + 1, remaining - e, exponents, out);
    }
    exponents[position] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_plane() {
        // y = 2 + 3a − b on a small grid.
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for a in 0..4 {
            for b in 0..3 {
                let (a, b) = (a as f64, b as f64);
                features.push(vec![a, b]);
                targets.push(2.0 + 3.0 * a - b);
            }
        }
        let model = fit_multilinear(&features, &targets).unwrap();
        assert!((model.coefficients[0] - 2.0).abs() < 1e-9);
        assert!((model.coefficients[1] - 3.0).abs() < 1e-9);
        assert!((model.coefficients[2] + 1.0).abs() < 1e-9);
        assert!((model.predict(&[2.0, 1.0]).unwrap() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_features_are_degenerate() {
        // Second feature is exactly twice the first.
        let features: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let targets: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let err = fit_multilinear(&features, &targets).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit { .. }));
    }

    #[test]
    fn expansion_order_is_fixed() {
        let expanded = polynomial_features(&[2.0, 3.0], 2);
        // a, b, a², ab, b².
        assert_eq!(expanded, vec![2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn expansion_degree_one_is_identity() {
        assert_eq!(polynomial_features(&[5.0, 7.0], 1), vec![5.0, 7.0]);
    }

    #[test]
    fn quadratic_surface_recovered_via_expansion() {
        // y = 1 + 0.5a + ab on a grid, fitted on degree-2 expansion.
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for a in 0..5 {
            for b in 0..5 {
                let (a, b) = (a as f64, b as f64);
                features.push(polynomial_features(&[a, b], 2));
                targets.push(1.0 + 0.5 * a + a * b);
            }
        }
        let model = fit_multilinear(&features, &targets).unwrap();
        let probe = polynomial_features(&[3.0, 2.0], 2);
        let expected = 1.0 + 0.5 * 3.0 + 3.0 * 2.0;
        assert!((model.predict(&probe).unwrap() - expected).abs() < 1e-8);
    }
}
