use serde::{Deserialize, Serialize};

use super::samples::{majority_class, Samples};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Scalar")]
pub enum TreeNode<T> {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

/// Axis-aligned classification tree stored as a pre-order node array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", try_from = "RawTree<T>")]
pub struct DecisionTree<T> {
    nodes: Vec<TreeNode<T>>,
    max_depth: usize,
    schema: Vec<String>,
    n_classes: usize,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawTree<T> {
    nodes: Vec<TreeNode<T>>,
    max_depth: usize,
    schema: Vec<String>,
    n_classes: usize,
}

impl<T: Scalar> TryFrom<RawTree<T>> for DecisionTree<T> {
    type Error = Error;

    fn try_from(raw: RawTree<T>) -> Result<Self> {
        DecisionTree::from_nodes(raw.nodes, raw.max_depth, raw.schema, raw.n_classes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 3 }
    }
}

impl<T: Scalar> DecisionTree<T> {
    /// Validates a node array: children come after their parent, leaves carry
    /// valid classes, splits reference known features, and depth is bounded.
    pub fn from_nodes(
        nodes: Vec<TreeNode<T>>,
        max_depth: usize,
        schema: Vec<String>,
        n_classes: usize,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Input("tree has no nodes".into()));
        }
        let mut depth = vec![usize::MAX; nodes.len()];
        depth[0] = 0;
        for (i, node) in nodes.iter().enumerate() {
            if depth[i] == usize::MAX {
                return Err(Error::Input(format!("tree node {i} is unreachable")));
            }
            match *node {
                TreeNode::Leaf { class } if class >= n_classes => {
                    return Err(Error::Input(format!("leaf class {class} out of range")));
                }
                TreeNode::Leaf { .. } => {}
                TreeNode::Split {
                    feature,
                    left,
                    right,
                    ..
                } => {
                    if feature >= schema.len() {
                        return Err(Error::Input(format!("split feature {feature} out of range")));
                    }
                    for child in [left, right] {
                        if child <= i || child >= nodes.len() || depth[child] != usize::MAX {
                            return Err(Error::Input(format!("bad child index {child} at node {i}")));
                        }
                        depth[child] = depth[i] + 1;
                    }
                    if depth[i] + 1 > max_depth {
                        return Err(Error::Input(format!("tree deeper than max_depth {max_depth}")));
                    }
                }
            }
        }
        Ok(Self {
            nodes,
            max_depth,
            schema,
            n_classes,
        })
    }

    pub fn nodes(&self) -> &[TreeNode<T>] {
        &self.nodes
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[TreeNode<T>], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict(&self, x: &[T]) -> Result<usize> {
        if x.len() != self.schema.len() {
            return Err(Error::Schema {
                expected: self.schema.len(),
                got: x.len(),
            });
        }
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { class } => return Ok(class),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// A candidate split with its quality `Σ_l c²/n_l + Σ_r c²/n_r` kept as an
/// exact fraction `num / den` (higher is better, i.e. lower weighted Gini).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitChoice<T> {
    pub feature: usize,
    pub threshold: T,
    pub n_left: usize,
    num: u128,
    den: u128,
}

impl<T: Scalar> SplitChoice<T> {
    /// Weighted Gini impurity of the two children.
    pub fn weighted_gini(&self, n: usize) -> f64 {
        1.0 - (self.num as f64 / self.den as f64) / n as f64
    }

    fn better_than(&self, other: &Self) -> bool {
        self.num * other.den > other.num * self.den
    }
}

fn sum_sq(counts: &[usize]) -> u128 {
    counts.iter().map(|&c| (c as u128) * (c as u128)).sum()
}

/// Best Gini split of the samples at `indices`, enumerating midpoints between
/// consecutive distinct values of every feature. Ties go to the smaller
/// feature index, then the smaller threshold. `None` when no candidate
/// strictly lowers impurity.
pub fn best_split<T: Scalar>(
    samples: &Samples<'_, T>,
    indices: &[usize],
    n_classes: usize,
) -> Option<SplitChoice<T>> {
    let n = indices.len();
    let mut total = vec![0usize; n_classes];
    for &i in indices {
        total[samples.labels()[i]] += 1;
    }
    // parent quality Σc²/n as fraction
    let parent = SplitChoice {
        feature: 0,
        threshold: T::zero(),
        n_left: 0,
        num: sum_sq(&total),
        den: n as u128,
    };
    let mut best: Option<SplitChoice<T>> = None;
    let mut order = indices.to_vec();
    for f in 0..samples.n_features() {
        order.sort_by(|&a, &b| {
            samples.row(a)[f]
                .partial_cmp(&samples.row(b)[f])
                .expect("finite features")
                .then(a.cmp(&b))
        });
        let mut left = vec![0usize; n_classes];
        for pos in 0..n - 1 {
            left[samples.labels()[order[pos]]] += 1;
            let (v, next) = (samples.row(order[pos])[f], samples.row(order[pos + 1])[f]);
            if v == next {
                continue;
            }
            let nl = pos + 1;
            let nr = n - nl;
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let cand = SplitChoice {
                feature: f,
                threshold: (v + next) / T::of(2.0),
                n_left: nl,
                num: sum_sq(&left) * nr as u128 + sum_sq(&right) * nl as u128,
                den: (nl * nr) as u128,
            };
            if best.as_ref().map_or(true, |b| cand.better_than(b)) {
                best = Some(cand);
            }
        }
    }
    best.filter(|b| b.better_than(&parent))
}

pub fn fit_tree<T: Scalar>(
    samples: &Samples<'_, T>,
    n_classes: usize,
    params: &TreeParams,
) -> Result<DecisionTree<T>> {
    if samples.is_empty() {
        return Err(Error::Input("cannot fit a tree on no samples".into()));
    }
    if params.max_depth == 0 {
        return Err(Error::Config("max_depth must be at least 1".into()));
    }
    samples.check_labels(n_classes)?;
    samples.check_finite()?;
    let mut nodes = Vec::new();
    let all: Vec<usize> = (0..samples.len()).collect();
    grow(samples, &all, 0, params.max_depth, n_classes, &mut nodes);
    DecisionTree::from_nodes(nodes, params.max_depth, samples.schema().to_vec(), n_classes)
}

fn grow<T: Scalar>(
    samples: &Samples<'_, T>,
    indices: &[usize],
    depth: usize,
    max_depth: usize,
    n_classes: usize,
    nodes: &mut Vec<TreeNode<T>>,
) -> usize {
    let id = nodes.len();
    let mut counts = vec![0; n_classes];
    for &i in indices {
        counts[samples.labels()[i]] += 1;
    }
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let leaf = TreeNode::Leaf {
        class: majority_class(&counts),
    };
    if depth >= max_depth || pure || indices.len() < 2 {
        nodes.push(leaf);
        return id;
    }
    let Some(split) = best_split(samples, indices, n_classes) else {
        nodes.push(leaf);
        return id;
    };
    nodes.push(leaf);
    let (l, r): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| samples.row(i)[split.feature] <= split.threshold);
    let left = grow(samples, &l, depth + 1, max_depth, n_classes, nodes);
    let right = grow(samples, &r, depth + 1, max_depth, n_classes, nodes);
    nodes[id] = TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}

/// Fits a CART tree on feature vectors that share one schema.
pub fn train_tree<T: Scalar>(
    features: &[FeatureVector<T>],
    labels: &[usize],
    n_classes: usize,
    params: &TreeParams,
) -> Result<DecisionTree<T>> {
    fit_tree(&Samples::from_vectors(features, labels)?, n_classes, params)
}
