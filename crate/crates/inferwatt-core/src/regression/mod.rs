//! Small regression toolkit: ordinary least squares, polynomial fits, CART
//! decision trees, random forests, error metrics, and model persistence.
//!
//! Everything here is deterministic: fits with the same data, hyperparameters,
//! and seed produce bit-identical models. Randomness (bootstrap resampling,
//! train/test shuffles) always flows from an explicit caller-supplied seed.

mod compare;
mod forest;
mod io;
mod linear;
mod metrics;
mod multilinear;
mod polynomial;
mod solve;
mod split;
mod tree;

pub use compare::{compare_algorithms, AlgorithmScore, CompareConfig};
pub use forest::{fit_random_forest, ForestHyperparams, ForestModel};
pub use io::{fingerprint_rows, load_model, save_model, FittedModel, TrainedModel, FORMAT_VERSION};
pub use linear::{fit_linear, LinearModel};
pub use metrics::{metrics, MetricReport};
pub use polynomial::{fit_polynomial, leave_one_out_r_squared, PolynomialModel};
pub use split::train_test_split;
pub use tree::{fit_decision_tree, TreeHyperparams, TreeModel, TreeNode};
