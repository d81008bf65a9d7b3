//! Random forest regression: bagged CART trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

use super::tree::{fit_decision_tree, validate_training_data, TreeHyperparams, TreeModel};

/// Forest configuration: how many trees, how each grows, and whether each
/// tree sees a bootstrap resample or the full dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    pub tree: TreeHyperparams,
    pub bootstrap: bool,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        ForestHyperparams {
            n_trees: 100,
            tree: TreeHyperparams::default(),
            bootstrap: true,
        }
    }
}

/// A fitted forest; its prediction is the arithmetic mean of its trees'
/// predictions, taken in tree order.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
    n_trees: usize,
    seed: u64,
    bootstrap: bool,
}

impl ForestModel {
    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.n_trees
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bootstrap(&self) -> bool {
        self.bootstrap
    }

    pub fn dimension(&self) -> usize {
        self.trees[0].dimension()
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for tree in &self.trees {
            sum += tree.predict(features)?;
        }
        Ok(sum / self.trees.len() as f64)
    }

    pub(crate) fn from_parts(
        trees: Vec<TreeModel>,
        n_trees: usize,
        seed: u64,
        bootstrap: bool,
    ) -> std::result::Result<Self, String> {
        if trees.is_empty() {
            return Err("trees: forest has no trees".to_string());
        }
        if trees.len() != n_trees {
            return Err(format!(
                "n_trees: declared {} but {} trees are present",
                n_trees,
                trees.len()
            ));
        }
        let dimension = trees[0].dimension();
        if trees.iter().any(|t| t.dimension() != dimension) {
            return Err("trees: inconsistent feature dimensions".to_string());
        }
        Ok(ForestModel {
            trees,
            n_trees,
            seed,
            bootstrap,
        })
    }
}

/// Derives the per-tree RNG seed from the forest seed: an index-offset
/// splitmix64 mix, so trees get decorrelated streams and the same
/// (seed, index) pair always yields the same stream.
pub(crate) fn stream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fits `n_trees` CART trees, each on its own bootstrap resample (n draws
/// with replacement) of the training data. Every split considers all
/// features. The whole fit is a pure function of (data, hyperparams, seed).
pub fn fit_random_forest(
    features: &[Vec<f64>],
    targets: &[f64],
    hyperparams: &ForestHyperparams,
    seed: u64,
) -> Result<ForestModel> {
    validate_training_data(features, targets, "random forest fit")?;
    let n = targets.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            context: "random forest fit",
            needed: 2,
            got: n,
        });
    }
    if hyperparams.n_trees == 0 {
        return Err(Error::InvalidParameter {
            name: "n_trees",
            message: "must be at least 1".to_string(),
        });
    }

    let mut trees = Vec::with_capacity(hyperparams.n_trees);
    for tree_index in 0..hyperparams.n_trees {
        let tree = if hyperparams.bootstrap {
            let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(seed, tree_index as u64));
            let mut sample_features = Vec::with_capacity(n);
            let mut sample_targets = Vec::with_capacity(n);
            for _ in 0..n {
                let pick = rng.random_range(0..n);
                sample_features.push(features[pick].clone());
                sample_targets.push(targets[pick]);
            }
            fit_decision_tree(&sample_features, &sample_targets, &hyperparams.tree)?
        } else {
            fit_decision_tree(features, targets, &hyperparams.tree)?
        };
        trees.push(tree);
    }
    Ok(ForestModel {
        trees,
        n_trees: hyperparams.n_trees,
        seed,
        bootstrap: hyperparams.bootstrap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let features: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![i as f64 * 0.5, (i % 7) as f64])
            .collect();
        let targets: Vec<f64> = features
            .iter()
            .map(|row| 0.3 * row[0] + 0.1 * row[1] * row[1])
            .collect();
        (features, targets)
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (features, targets) = demo_data();
        let hp = ForestHyperparams {
            n_trees: 12,
            ..ForestHyperparams::default()
        };
        let a = fit_random_forest(&features, &targets, &hp, 99).unwrap();
        let b = fit_random_forest(&features, &targets, &hp, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let (features, targets) = demo_data();
        let hp = ForestHyperparams {
            n_trees: 8,
            ..ForestHyperparams::default()
        };
        let a = fit_random_forest(&features, &targets, &hp, 1).unwrap();
        let b = fit_random_forest(&features, &targets, &hp, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn prediction_is_mean_of_trees() {
        let (features, targets) = demo_data();
        let hp = ForestHyperparams {
            n_trees: 15,
            ..ForestHyperparams::default()
        };
        let forest = fit_random_forest(&features, &targets, &hp, 5).unwrap();
        let probe = [7.3, 2.0];
        let mut sum = 0.0;
        for tree in forest.trees() {
            sum += tree.predict(&probe).unwrap();
        }
        assert_eq!(
            forest.predict(&probe).unwrap(),
            sum / forest.trees().len() as f64
        );
    }

    #[test]
    fn prediction_stays_within_target_range() {
        let (features, targets) = demo_data();
        let forest =
            fit_random_forest(&features, &targets, &ForestHyperparams::default(), 3).unwrap();
        let lo = targets.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for probe in [[-100.0, 0.0], [0.0, 3.0], [500.0, 6.0]] {
            let p = forest.predict(&probe).unwrap();
            assert!(p >= lo && p <= hi, "{p} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn single_sample_is_insufficient() {
        let err = fit_random_forest(
            &[vec![1.0]],
            &[1.0],
            &ForestHyperparams::default(),
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InsufficientData { needed: 2, .. }));
    }

    #[test]
    fn zero_trees_rejected() {
        let (features, targets) = demo_data();
        let hp = ForestHyperparams {
            n_trees: 0,
            ..ForestHyperparams::default()
        };
        let err = fit_random_forest(&features, &targets, &hp, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidParameter {
                name: "n_trees",
                ..
            }
        ));
    }

    #[test]
    fn stream_seeds_are_distinct_and_stable() {
        let a = stream_seed(42, 0);
        assert_eq!(a, stream_seed(42, 0));
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..1000 {
            seen.insert(stream_seed(42, i));
        }
        assert_eq!(seen.len(), 1000);
    }
}
