//! Expert feature extractors and the similarity functions they induce.

mod color;
mod hsv;
mod hull;
mod leaf;
mod lesion;
mod segment;

use serde::{Deserialize, Serialize};

pub use self::color::{color_feature, color_from_segments, ColorClass, ColorParams};
pub use self::hsv::{hsv_to_rgb01, rgb01_to_hsv, rgb_to_hsv, HsvRange, HsvThresholds, LeafPixel};
pub use self::hull::{convex_hull, hull_contains, Point};
pub use self::leaf::{leaf_counts, leaf_features, median_filter, LeafCounts, LeafFeatures, LeafParams};
pub use self::lesion::{lesion_features, LesionFeatures, LesionParams};
pub use self::segment::{segment_image, QuantizedComponents, Segment, SegmentStats, Segmenter};
use crate::core::Similarity;
use crate::error::{Error, Result};
use crate::learners::DecisionTree;
use crate::scalar::Scalar;

/// Named real-valued features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T> {
    pub schema: Vec<String>,
    pub values: Vec<T>,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(schema: Vec<String>, values: Vec<T>) -> Result<Self> {
        if schema.len() != values.len() {
            return Err(Error::Schema {
                expected: schema.len(),
                got: values.len(),
            });
        }
        Ok(Self { schema, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl LeafFeatures {
    pub const SCHEMA: [&'static str; 2] = ["F_d", "F_b"];

    pub fn to_vector<T: Scalar>(&self) -> FeatureVector<T> {
        FeatureVector {
            schema: Self::SCHEMA.iter().map(|s| s.to_string()).collect(),
            values: vec![T::of(self.discolored), T::of(self.brown)],
        }
    }
}

impl LesionFeatures {
    pub const SCHEMA: [&'static str; 3] = ["Sz", "Rd", "Sat"];

    pub fn to_vector<T: Scalar>(&self) -> FeatureVector<T> {
        FeatureVector {
            schema: Self::SCHEMA.iter().map(|s| s.to_string()).collect(),
            values: vec![T::of(self.size), T::of(self.redness), T::of(self.saturated)],
        }
    }
}

/// 1 iff both points carry the same label. Any labelling induces an
/// equivalence relation, so this is the prototype for binary similarities.
#[derive(Clone, Copy, Debug, Default)]
pub struct LabelSimilarity;

impl<T: Scalar> Similarity<T> for LabelSimilarity {
    type Point = usize;

    fn score(&self, a: &usize, b: &usize) -> T {
        if a == b {
            T::one()
        } else {
            T::zero()
        }
    }
}

/// Precomputed `n × n` scores; points are row/column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSimilarity<T> {
    n: usize,
    scores: Vec<T>,
}

impl<T: Scalar> MatrixSimilarity<T> {
    pub fn new(n: usize, scores: Vec<T>) -> Result<Self> {
        if scores.len() != n * n {
            return Err(Error::Input(format!("expected {} scores, got {}", n * n, scores.len())));
        }
        if scores.iter().any(|s| !(*s >= T::zero() && *s <= T::one())) {
            return Err(Error::Input("similarity scores must lie in [0, 1]".into()));
        }
        Ok(Self { n, scores })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index points `0..n` to use with this similarity.
    pub fn points(&self) -> Vec<usize> {
        (0..self.n).collect()
    }
}

impl<T: Scalar> Similarity<T> for MatrixSimilarity<T> {
    type Point = usize;

    fn score(&self, a: &usize, b: &usize) -> T {
        self.scores[a * self.n + b]
    }
}

/// 1 iff both images were assigned the same dominant color. Images without a
/// color match nothing, not even themselves.
#[derive(Clone, Copy, Debug, Default)]
pub struct ColorSimilarity;

impl<T: Scalar> Similarity<T> for ColorSimilarity {
    type Point = Option<ColorClass>;

    fn score(&self, a: &Option<ColorClass>, b: &Option<ColorClass>) -> T {
        match (a, b) {
            (Some(x), Some(y)) if x == y => T::one(),
            _ => T::zero(),
        }
    }
}

/// 1 iff the tree predicts the same class for both feature vectors.
pub fn tree_similarity<T: Scalar>(
    x1: &FeatureVector<T>,
    x2: &FeatureVector<T>,
    tree: &DecisionTree<T>,
) -> Result<T> {
    for x in [x1, x2] {
        if x.schema != tree.schema() {
            return Err(Error::Schema {
                expected: tree.schema().len(),
                got: x.len(),
            });
        }
    }
    Ok(if tree.predict(&x1.values)? == tree.predict(&x2.values)? {
        T::one()
    } else {
        T::zero()
    })
}

/// Tree-induced binary similarity. Points whose schema does not match the
/// tree score 0 against everything.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeSimilarity<T> {
    pub tree: DecisionTree<T>,
}

impl<T: Scalar> Similarity<T> for TreeSimilarity<T> {
    type Point = FeatureVector<T>;

    fn score(&self, a: &FeatureVector<T>, b: &FeatureVector<T>) -> T {
        tree_similarity(a, b, &self.tree).unwrap_or_else(|_| T::zero())
    }
}

/// Serializable description of the similarity a model was trained with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum SimilaritySpec<T> {
    Color(ColorParams),
    LeafTree {
        leaf: LeafParams,
        tree: DecisionTree<T>,
    },
    LesionTree {
        lesion: LesionParams,
        tree: DecisionTree<T>,
    },
    Label,
}
