//! Side-by-side evaluation of the candidate algorithms on one dataset.

use crate::dataset::EncodingSample;
use crate::error::{Error, Result};

use super::forest::{fit_random_forest, ForestHyperparams};
use super::metrics::{metrics, MetricReport};
use super::multilinear::{fit_multilinear, polynomial_features};
use super::split::train_test_split;
use super::tree::{fit_decision_tree, TreeHyperparams};

/// Knobs for the comparison run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    pub split_ratio: f64,
    pub polynomial_degree: usize,
    pub tree: TreeHyperparams,
    pub forest: ForestHyperparams,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            split_ratio: 0.8,
            polynomial_degree: 2,
            tree: TreeHyperparams::default(),
            forest: ForestHyperparams::default(),
        }
    }
}

/// Held-out metrics for one algorithm, named for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmScore {
    pub name: &'static str,
    pub report: MetricReport,
}

/// Fits linear, polynomial, decision-tree, and random-forest regressors on
/// one shared train split of the encoding samples and scores each on the
/// held-out test split. Results come back sorted by ascending MAPE, best
/// first. The linear and polynomial baselines run on the full 2-D feature
/// vector (parameter count, prompt tokens); the polynomial one fits a
/// total-degree expansion of it.
pub fn compare_algorithms(
    samples: &[EncodingSample],
    config: &CompareConfig,
    seed: u64,
) -> Result<Vec<AlgorithmScore>> {
    if samples.len() < 10 {
        return Err(Error::InsufficientData {
            context: "algorithm comparison",
            needed: 10,
            got: samples.len(),
        });
    }

    let (train, test) = train_test_split(samples, config.split_ratio, seed)?;
    let raw = |s: &EncodingSample| vec![s.model_params_b, s.prompt_tokens as f64];
    let train_x: Vec<Vec<f64>> = train.iter().map(raw).collect();
    let train_y: Vec<f64> = train.iter().map(|s| s.encoding_latency_s).collect();
    let test_x: Vec<Vec<f64>> = test.iter().map(raw).collect();
    let test_y: Vec<f64> = test.iter().map(|s| s.encoding_latency_s).collect();

    let mut scores = Vec::with_capacity(4);

    let linear = fit_multilinear(&train_x, &train_y)?;
    let predictions = test_x
        .iter()
        .map(|x| linear.predict(x))
        .collect::<Result<Vec<f64>>>()?;
    scores.push(AlgorithmScore {
        name: "linear",
        report: metrics(&test_y, &predictions)?,
    });

    let expand = |x: &Vec<f64>| polynomial_features(x, config.polynomial_degree);
    let train_exp: Vec<Vec<f64>> = train_x.iter().map(expand).collect();
    let poly = fit_multilinear(&train_exp, &train_y)?;
    let predictions = test_x
        .iter()
        .map(|x| poly.predict(&expand(x)))
        .collect::<Result<Vec<f64>>>()?;
    scores.push(AlgorithmScore {
        name: "polynomial",
        report: metrics(&test_y, &predictions)?,
    });

    let tree = fit_decision_tree(&train_x, &train_y, &config.tree)?;
    let predictions = test_x
        .iter()
        .map(|x| tree.predict(x))
        .collect::<Result<Vec<f64>>>()?;
    scores.push(AlgorithmScore {
        name: "decision_tree",
        report: metrics(&test_y, &predictions)?,
    });

    let forest = fit_random_forest(&train_x, &train_y, &config.forest, seed)?;
    let predictions = test_x
        .iter()
        .map(|x| forest.predict(x))
        .collect::<Result<Vec<f64>>>()?;
    scores.push(AlgorithmScore {
        name: "random_forest",
        report: metrics(&test_y, &predictions)?,
    });

    scores.sort_by(|a, b| a.report.mape.total_cmp(&b.report.mape));
    Ok(scores)
}
