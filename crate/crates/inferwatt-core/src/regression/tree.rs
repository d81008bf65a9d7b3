//! CART regression tree: greedy variance-reduction splits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Growth limits for a decision tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeHyperparams {
    /// Maximum number of split levels below the root; `None` is unlimited.
    pub max_depth: Option<usize>,
    /// Every leaf must hold at least this many training samples.
    pub min_samples_leaf: usize,
}

impl Default for TreeHyperparams {
    fn default() -> Self {
        TreeHyperparams {
            max_depth: Some(16),
            min_samples_leaf: 2,
        }
    }
}

/// One node in the flattened tree. Children are indices into the node
/// arena; the root is index 0 and children always follow their parent
/// (preorder), which keeps serialization trivial.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
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

/// A fitted regression tree. Prediction descends from the root taking the
/// left branch when `x[feature] < threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    nodes: Vec<TreeNode>,
    dimension: usize,
    hyperparams: TreeHyperparams,
}

impl TreeModel {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn hyperparams(&self) -> &TreeHyperparams {
        &self.hyperparams
    }

    /// Number of split levels below the root (a lone leaf has depth 0).
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((idx, depth)) = stack.pop() {
            match &self.nodes[idx] {
                TreeNode::Leaf { .. } => max = max.max(depth),
                TreeNode::Split { left, right, .. } => {
                    stack.push((*left, depth + 1));
                    stack.push((*right, depth + 1));
                }
            }
        }
        max
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: features.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "features",
                message: "all feature values must be finite".to_string(),
            });
        }
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return Ok(*value),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if features[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Reassembles a tree from stored parts, checking every structural
    /// invariant so a hand-edited or corrupted file cannot produce a tree
    /// that panics or loops during prediction.
    pub(crate) fn from_parts(
        nodes: Vec<TreeNode>,
        dimension: usize,
        hyperparams: TreeHyperparams,
    ) -> std::result::Result<Self, String> {
        if nodes.is_empty() {
            return Err("nodes: tree has no nodes".to_string());
        }
        if dimension == 0 {
            return Err("dimension: must be at least 1".to_string());
        }
        let mut visited = vec![false; nodes.len()];
        let mut stack = vec![(0usize, 0usize)];
        let mut max_depth_seen = 0;
        while let Some((idx, depth)) = stack.pop() {
            let node = nodes
                .get(idx)
                .ok_or_else(|| format!("nodes[{idx}]: child index out of bounds"))?;
            if std::mem::replace(&mut visited[idx], true) {
                return Err(format!("nodes[{idx}]: reached by two parents"));
            }
            match node {
                TreeNode::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(format!("nodes[{idx}].value: not finite"));
                    }
                    max_depth_seen = max_depth_seen.max(depth);
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= dimension {
                        return Err(format!(
                            "nodes[{idx}].feature: {feature} exceeds dimension {dimension}"
                        ));
                    }
                    if !threshold.is_finite() {
                        return Err(format!("nodes[{idx}].threshold: not finite"));
                    }
                    stack.push((*left, depth + 1));
                    stack.push((*right, depth + 1));
                }
            }
        }
        if let Some(first_unreached) = visited.iter().position(|v| !v) {
            return Err(format!("nodes[{first_unreached}]: unreachable from root"));
        }
        if let Some(limit) = hyperparams.max_depth {
            if max_depth_seen > limit {
                return Err(format!(
                    "nodes: depth {max_depth_seen} exceeds max_depth {limit}"
                ));
            }
        }
        Ok(TreeModel {
            nodes,
            dimension,
            hyperparams,
        })
    }
}

/// Fits a CART regression tree greedily: every node takes the
/// (feature, threshold) pair that minimizes the summed squared error of
/// the two children, with thresholds midway between consecutive distinct
/// sorted feature values. Equal-cost candidates resolve to the lowest
/// feature index, then the lowest threshold, so refits are bit-identical.
pub fn fit_decision_tree(
    features: &[Vec<f64>],
    targets: &[f64],
    hyperparams: &TreeHyperparams,
) -> Result<TreeModel> {
    let dimension = validate_training_data(features, targets, "decision tree fit")?;
    if hyperparams.min_samples_leaf == 0 {
        return Err(Error::InvalidParameter {
            name: "min_samples_leaf",
            message: "must be at least 1".to_string(),
        });
    }

    let mut builder = Builder {
        features,
        targets,
        hyperparams,
        dimension,
        nodes: Vec::new(),
    };
    let indices: Vec<usize> = (0..targets.len()).collect();
    builder.grow(indices, 0);
    Ok(TreeModel {
        nodes: builder.nodes,
        dimension,
        hyperparams: *hyperparams,
    })
}

/// Shared validation for tree-like fits: consistent lengths, rectangular
/// features, at least one row and column, everything finite. Returns the
/// feature dimension.
pub(super) fn validate_training_data(
    features: &[Vec<f64>],
    targets: &[f64],
    context: &'static str,
) -> Result<usize> {
    if features.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: targets.len(),
        });
    }
    let dimension = match features.first() {
        Some(row) => row.len(),
        None => return Err(Error::EmptyInput { context }),
    };
    if dimension == 0 {
        return Err(Error::InvalidParameter {
            name: "features",
            message: "rows must have at least one feature".to_string(),
        });
    }
    for row in features {
        if row.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "features",
                message: "all feature values must be finite".to_string(),
            });
        }
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "targets",
            message: "all target values must be finite".to_string(),
        });
    }
    Ok(dimension)
}

struct Builder<'a> {
    features: &'a [Vec<f64>],
    targets: &'a [f64],
    hyperparams: &'a TreeHyperparams,
    dimension: usize,
    nodes: Vec<TreeNode>,
}

struct Candidate {
    cost: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    /// Grows the subtree over `indices` and returns its root's arena index.
    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let n = indices.len();
        let mean = indices.iter().map(|&i| self.targets[i]).sum::<f64>() / n as f64;

        let depth_allows = self.hyperparams.max_depth.map_or(true, |limit| depth < limit);
        let size_allows = n >= 2 * self.hyperparams.min_samples_leaf;
        let lo = indices
            .iter()
            .map(|&i| self.targets[i])
            .fold(f64::INFINITY, f64::min);
        let hi = indices
            .iter()
            .map(|&i| self.targets[i])
            .fold(f64::NEG_INFINITY, f64::max);

        let candidate = if depth_allows && size_allows && lo < hi {
            self.best_split(&indices)
        } else {
            None
        };
        let Some(split) = candidate else {
            self.nodes.push(TreeNode::Leaf { value: mean });
            return self.nodes.len() - 1;
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.features[i][split.feature] < split.threshold);

        let me = self.nodes.len();
        self.nodes.push(TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        if let TreeNode::Split {
            left: l, right: r, ..
        } = &mut self.nodes[me]
        {
            *l = left;
            *r = right;
        }
        me
    }

    fn best_split(&self, indices: &[usize]) -> Option<Candidate> {
        let n = indices.len();
        let msl = self.hyperparams.min_samples_leaf;
        let mut best: Option<Candidate> = None;

        let mut order: Vec<usize> = indices.to_vec();
        for feature in 0..self.dimension {
            order.sort_by(|&a, &b| self.features[a][feature].total_cmp(&self.features[b][feature]));

            // Prefix sums of y and y² over the sorted order let each
            // candidate's child SSEs come out in O(1):
            // SSE = Σy² − (Σy)²/n.
            let mut prefix_y = Vec::with_capacity(n + 1);
            let mut prefix_y2 = Vec::with_capacity(n + 1);
            prefix_y.push(0.0);
            prefix_y2.push(0.0);
            for &i in &order {
                let y = self.targets[i];
                prefix_y.push(prefix_y.last().unwrap() + y);
                prefix_y2.push(prefix_y2.last().unwrap() + y * y);
            }
            let total_y = *prefix_y.last().unwrap();
            let total_y2 = *prefix_y2.last().unwrap();

            for cut in 1..n {
                let lo = self.features[order[cut - 1]][feature];
                let hi = self.features[order[cut]][feature];
                if lo == hi {
                    continue;
                }
                if cut < msl || n - cut < msl {
                    continue;
                }
                // Midpoint of the gap; if the two values are adjacent
                // floats the midpoint collapses onto `lo`, and using `hi`
                // keeps the partition (x < threshold) at the same cut.
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold <= lo {
                    threshold = hi;
                }

                let left_n = cut as f64;
                let right_n = (n - cut) as f64;
                let sse_left = (prefix_y2[cut] - prefix_y[cut] * prefix_y[cut] / left_n).max(0.0);
                let right_y = total_y - prefix_y[cut];
                let sse_right = (total_y2 - prefix_y2[cut] - right_y * right_y / right_n).max(0.0);
                let cost = sse_left + sse_right;

                // Strict improvement only: scanning features and cuts in
                // ascending order makes the first of any equal-cost
                // candidates win, which is the documented tie-break.
                if best.as_ref().map_or(true, |b| cost < b.cost) {
                    best = Some(Candidate {
                        cost,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best
    }
}
