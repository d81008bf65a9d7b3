//! Versioned on-disk model format.
//!
//! Models are stored as a single JSON document carrying the fitted
//! parameters plus enough provenance to answer "where did this model come
//! from": hyperparameters, RNG seed, a fingerprint of the training data,
//! and the creation time. Loading validates every structural invariant so
//! a corrupt or hand-edited file fails with a message naming the offending
//! field instead of misbehaving at prediction time.
//!
//! Saving is idempotent: when the target file already holds an equivalent
//! model (everything but the timestamp equal), the bytes are left alone.
//! Retraining with the same data and seed therefore leaves model files
//! bit-identical, which keeps them diff-friendly under version control.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::forest::ForestModel;
use super::linear::LinearModel;
use super::polynomial::PolynomialModel;
use super::tree::{TreeHyperparams, TreeModel, TreeNode};

/// Version written to and accepted from model files.
pub const FORMAT_VERSION: u32 = 1;

/// A fitted model of any supported kind, with uniform prediction over a
/// feature vector (1-D kinds expect exactly one feature).
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Linear(LinearModel),
    Polynomial(PolynomialModel),
    DecisionTree(TreeModel),
    RandomForest(ForestModel),
}

impl FittedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            FittedModel::Linear(_) => "linear",
            FittedModel::Polynomial(_) => "polynomial",
            FittedModel::DecisionTree(_) => "decision_tree",
            FittedModel::RandomForest(_) => "random_forest",
        }
    }

    /// Number of features the model was trained on.
    pub fn dimension(&self) -> usize {
        match self {
            FittedModel::Linear(_) | FittedModel::Polynomial(_) => 1,
            FittedModel::DecisionTree(m) => m.dimension(),
            FittedModel::RandomForest(m) => m.dimension(),
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        match self {
            FittedModel::Linear(m) => Ok(m.predict(one_feature(features)?)),
            FittedModel::Polynomial(m) => Ok(m.predict(one_feature(features)?)),
            FittedModel::DecisionTree(m) => m.predict(features),
            FittedModel::RandomForest(m) => m.predict(features),
        }
    }
}

fn one_feature(features: &[f64]) -> Result<f64> {
    if features.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: features.len(),
        });
    }
    Ok(features[0])
}

/// A fitted model together with its provenance metadata — the unit that
/// gets saved, loaded, and handed to the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub fitted: FittedModel,
    /// RNG seed the fit consumed; `None` for deterministic fits.
    pub seed: Option<u64>,
    /// Fingerprint of the training data, `sha256:`-prefixed.
    pub data_fingerprint: String,
    pub created_unix_s: u64,
    /// Per-feature (min, max) observed during training, for extrapolation
    /// warnings. Empty when unavailable.
    pub feature_ranges: Vec<(f64, f64)>,
}

impl TrainedModel {
    pub fn new(
        fitted: FittedModel,
        seed: Option<u64>,
        data_fingerprint: String,
        feature_ranges: Vec<(f64, f64)>,
    ) -> Self {
        TrainedModel {
            fitted,
            seed,
            data_fingerprint,
            created_unix_s: creation_timestamp(),
            feature_ranges,
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        self.fitted.predict(features)
    }

    /// Equality of everything a retrain reproduces — the timestamp is
    /// deliberately ignored.
    pub fn content_eq(&self, other: &TrainedModel) -> bool {
        self.fitted == other.fitted
            && self.seed == other.seed
            && self.data_fingerprint == other.data_fingerprint
            && self.feature_ranges == other.feature_ranges
    }
}

/// File creation time: `SOURCE_DATE_EPOCH` when set (reproducible-build
/// convention), wall clock otherwise.
fn creation_timestamp() -> u64 {
    if let Ok(raw) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(value) = raw.parse() {
            return value;
        }
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// SHA-256 over the row-major little-endian bytes of a numeric matrix,
/// rendered as `sha256:<hex>`. The canonical training-data fingerprint.
pub fn fingerprint_rows(rows: &[Vec<f64>]) -> String {
    let mut hasher = Sha256::new();
    hasher.update((rows.len() as u64).to_le_bytes());
    for row in rows {
        hasher.update((row.len() as u64).to_le_bytes());
        for value in row {
            hasher.update(value.to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(7 + digest.len() * 2);
    out.push_str("sha256:");
    for byte in digest {
        out.push_str(&format!("{:02x}", byte));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct Document {
    format_version: u32,
    kind: String,
    hyperparams: serde_json::Value,
    seed: Option<u64>,
    data_fingerprint: String,
    created_unix_s: u64,
    feature_ranges: Vec<(f64, f64)>,
    payload: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct LinearPayload {
    slope: f64,
    intercept: f64,
}

#[derive(Serialize, Deserialize)]
struct PolynomialHyperparams {
    degree: usize,
}

#[derive(Serialize, Deserialize)]
struct PolynomialPayload {
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRecord {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Serialize, Deserialize)]
struct TreePayload {
    dimension: usize,
    nodes: Vec<NodeRecord>,
}

#[derive(Serialize, Deserialize)]
struct ForestHyperparamsDoc {
    n_trees: usize,
    #[serde(flatten)]
    tree: TreeHyperparams,
    bootstrap: bool,
}

#[derive(Serialize, Deserialize)]
struct ForestPayload {
    dimension: usize,
    trees: Vec<Vec<NodeRecord>>,
}

fn node_records(nodes: &[TreeNode]) -> Vec<NodeRecord> {
    nodes
        .iter()
        .map(|n| match n {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => NodeRecord::Split {
                feature: *feature,
                threshold: *threshold,
                left: *left,
                right: *right,
            },
            TreeNode::Leaf { value } => NodeRecord::Leaf { value: *value },
        })
        .collect()
}

fn nodes_from_records(records: Vec<NodeRecord>) -> Vec<TreeNode> {
    records
        .into_iter()
        .map(|r| match r {
            NodeRecord::Split {
                feature,
                threshold,
                left,
                right,
            } => TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            },
            NodeRecord::Leaf { value } => TreeNode::Leaf { value },
        })
        .collect()
}

/// Writes the model as pretty-printed JSON. If the target already holds an
/// equivalent model, the existing bytes (and their timestamp) survive.
pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    if path.exists() {
        if let Ok(existing) = load_model(path) {
            if existing.content_eq(model) {
                return Ok(());
            }
        }
    }

    let bad_payload = |e: serde_json::Error| Error::ModelFile {
        path: Some(path.to_path_buf()),
        message: format!("payload: {}", e),
    };
    let (hyperparams, payload) = match &model.fitted {
        FittedModel::Linear(m) => (
            serde_json::json!({}),
            serde_json::to_value(LinearPayload {
                slope: m.slope,
                intercept: m.intercept,
            })
            .map_err(bad_payload)?,
        ),
        FittedModel::Polynomial(m) => (
            serde_json::to_value(PolynomialHyperparams { degree: m.degree() })
                .map_err(bad_payload)?,
            serde_json::to_value(PolynomialPayload {
                coefficients: m.coefficients.clone(),
            })
            .map_err(bad_payload)?,
        ),
        FittedModel::DecisionTree(m) => (
            serde_json::to_value(m.hyperparams()).map_err(bad_payload)?,
            serde_json::to_value(TreePayload {
                dimension: m.dimension(),
                nodes: node_records(m.nodes()),
            })
            .map_err(bad_payload)?,
        ),
        FittedModel::RandomForest(m) => (
            serde_json::to_value(ForestHyperparamsDoc {
                n_trees: m.n_trees(),
                tree: *m.trees()[0].hyperparams(),
                bootstrap: m.bootstrap(),
            })
            .map_err(bad_payload)?,
            serde_json::to_value(ForestPayload {
                dimension: m.dimension(),
                trees: m.trees().iter().map(|t| node_records(t.nodes())).collect(),
            })
            .map_err(bad_payload)?,
        ),
    };

    let doc = Document {
        format_version: FORMAT_VERSION,
        kind: model.fitted.kind().to_string(),
        hyperparams,
        seed: model.seed,
        data_fingerprint: model.data_fingerprint.clone(),
        created_unix_s: model.created_unix_s,
        feature_ranges: model.feature_ranges.clone(),
        payload,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::ModelFile {
        path: Some(path.to_path_buf()),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let corrupt = |message: String| Error::ModelFile {
        path: Some(path.to_path_buf()),
        message,
    };

    let doc: Document =
        serde_json::from_str(&text).map_err(|e| corrupt(format!("not a model document: {}", e)))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(corrupt(format!(
            "format_version: unsupported value {} (this build reads version {})",
            doc.format_version, FORMAT_VERSION
        )));
    }
    for (i, &(lo, hi)) in doc.feature_ranges.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(corrupt(format!(
                "feature_ranges[{i}]: ({lo}, {hi}) is not a valid range"
            )));
        }
    }

    let fitted = match doc.kind.as_str() {
        "linear" => {
            let payload: LinearPayload = serde_json::from_value(doc.payload)
                .map_err(|e| corrupt(format!("payload: {}", e)))?;
            if !(payload.slope.is_finite() && payload.intercept.is_finite()) {
                return Err(corrupt("payload.slope/intercept: not finite".to_string()));
            }
            FittedModel::Linear(LinearModel {
                slope: payload.slope,
                intercept: payload.intercept,
            })
        }
        "polynomial" => {
            let hp: PolynomialHyperparams = serde_json::from_value(doc.hyperparams)
                .map_err(|e| corrupt(format!("hyperparams: {}", e)))?;
            let payload: PolynomialPayload = serde_json::from_value(doc.payload)
                .map_err(|e| corrupt(format!("payload: {}", e)))?;
            if hp.degree < 1 {
                return Err(corrupt(format!(
                    "hyperparams.degree: {} must be at least 1",
                    hp.degree
                )));
            }
            if payload.coefficients.len() != hp.degree + 1 {
                return Err(corrupt(format!(
                    "payload.coefficients: length {} does not match degree {}",
                    payload.coefficients.len(),
                    hp.degree
                )));
            }
            if payload.coefficients.iter().any(|c| !c.is_finite()) {
                return Err(corrupt("payload.coefficients: not finite".to_string()));
            }
            FittedModel::Polynomial(PolynomialModel {
                coefficients: payload.coefficients,
            })
        }
        "decision_tree" => {
            let hp: TreeHyperparams = serde_json::from_value(doc.hyperparams)
                .map_err(|e| corrupt(format!("hyperparams: {}", e)))?;
            let payload: TreePayload = serde_json::from_value(doc.payload)
                .map_err(|e| corrupt(format!("payload: {}", e)))?;
            let tree = TreeModel::from_parts(nodes_from_records(payload.nodes), payload.dimension, hp)
                .map_err(|e| corrupt(format!("payload.{}", e)))?;
            FittedModel::DecisionTree(tree)
        }
        "random_forest" => {
            let hp: ForestHyperparamsDoc = serde_json::from_value(doc.hyperparams)
                .map_err(|e| corrupt(format!("hyperparams: {}", e)))?;
            let payload: ForestPayload = serde_json::from_value(doc.payload)
                .map_err(|e| corrupt(format!("payload: {}", e)))?;
            let seed = doc.seed.ok_or_else(|| {
                corrupt("seed: required for random_forest models".to_string())
            })?;
            let mut trees = Vec::with_capacity(payload.trees.len());
            for (i, records) in payload.trees.into_iter().enumerate() {
                let tree =
                    TreeModel::from_parts(nodes_from_records(records), payload.dimension, hp.tree)
                        .map_err(|e| corrupt(format!("payload.trees[{i}].{}", e)))?;
                trees.push(tree);
            }
            let forest = ForestModel::from_parts(trees, hp.n_trees, seed, hp.bootstrap)
                .map_err(|e| corrupt(format!("payload.{}", e)))?;
            FittedModel::RandomForest(forest)
        }
        other => return Err(corrupt(format!("kind: unknown model kind `{}`", other))),
    };

    if !doc.feature_ranges.is_empty() && doc.feature_ranges.len() != fitted.dimension() {
        return Err(corrupt(format!(
            "feature_ranges: expected {} entries, got {}",
            fitted.dimension(),
            doc.feature_ranges.len()
        )));
    }

    Ok(TrainedModel {
        fitted,
        seed: doc.seed,
        data_fingerprint: doc.data_fingerprint,
        created_unix_s: doc.created_unix_s,
        feature_ranges: doc.feature_ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::{fit_random_forest, ForestHyperparams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn linear_trained() -> TrainedModel {
        TrainedModel::new(
            FittedModel::Linear(LinearModel {
                slope: 2.0,
                intercept: 0.0,
            }),
            None,
            fingerprint_rows(&[vec![0.0, 0.0], vec![1.0, 2.0]]),
            vec![(0.0, 1.0)],
        )
    }

    #[test]
    fn linear_round_trip_predicts_identically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("linear.json");
        let model = linear_trained();
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded.predict(&[3.0]).unwrap(), 6.0);
        assert_eq!(loaded.fitted, model.fitted);
        assert_eq!(loaded.data_fingerprint, model.data_fingerprint);
    }

    #[test]
    fn forest_round_trip_predictions_bit_equal() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let features: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.random_range(1.0..60.0), rng.random_range(1.0..1920.0)])
            .collect();
        let targets: Vec<f64> = features.iter().map(|r| 0.01 * r[0] + 0.0005 * r[1]).collect();
        let hp = ForestHyperparams {
            n_trees: 10,
            ..ForestHyperparams::default()
        };
        let forest = fit_random_forest(&features, &targets, &hp, 21).unwrap();
        let model = TrainedModel::new(
            FittedModel::RandomForest(forest),
            Some(21),
            fingerprint_rows(&features),
            vec![(1.0, 60.0), (1.0, 1920.0)],
        );

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("forest.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        for _ in 0..20 {
            let probe = vec![rng.random_range(1.0..60.0), rng.random_range(1.0..1920.0)];
            assert_eq!(
                model.predict(&probe).unwrap(),
                loaded.predict(&probe).unwrap()
            );
        }
    }

    #[test]
    fn truncated_file_fails_to_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = linear_trained();
        save_model(&model, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(matches!(err, Error::ModelFile { .. }));
    }

    #[test]
    fn unsupported_version_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&linear_trained(), &path).unwrap();
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 2");
        fs::write(&path, text).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("format_version"));
    }

    #[test]
    fn coefficient_length_mismatch_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("poly.json");
        let model = TrainedModel::new(
            FittedModel::Polynomial(PolynomialModel {
                coefficients: vec![1.0, 0.0, 1.0],
            }),
            None,
            "sha256:test".to_string(),
            Vec::new(),
        );
        save_model(&model, &path).unwrap();
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("\"degree\": 2", "\"degree\": 3");
        fs::write(&path, text).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("coefficients"));
    }

    #[test]
    fn unknown_kind_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&linear_trained(), &path).unwrap();
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("\"kind\": \"linear\"", "\"kind\": \"cubist\"");
        fs::write(&path, text).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("cubist"));
    }

    #[test]
    fn resave_of_equivalent_model_keeps_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let first = linear_trained();
        save_model(&first, &path).unwrap();
        let before = fs::read(&path).unwrap();

        // Same content, different creation time — as a retrain would make.
        let mut second = first.clone();
        second.created_unix_s += 1000;
        save_model(&second, &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), before);
    }

    #[test]
    fn changed_model_overwrites() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&linear_trained(), &path).unwrap();
        let mut other = linear_trained();
        other.fitted = FittedModel::Linear(LinearModel {
            slope: 3.0,
            intercept: 1.0,
        });
        save_model(&other, &path).unwrap();
        assert_eq!(load_model(&path).unwrap().predict(&[1.0]).unwrap(), 4.0);
    }

    #[test]
    fn fingerprint_is_stable_and_data_sensitive() {
        let a = fingerprint_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = fingerprint_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let c = fingerprint_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.starts_with("sha256:"));
        assert_eq!(a.len(), 7 + 64);
    }

    #[test]
    fn linear_predict_requires_one_feature() {
        let model = linear_trained();
        let err = model.predict(&[1.0, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 1,
                got: 2
            }
        ));
    }
}
