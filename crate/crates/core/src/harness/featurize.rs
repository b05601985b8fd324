use rayon::prelude::*;

use super::config::{InputConfig, SimilarityConfig};
use super::data::ImageSource;
use crate::core::{Image, Similarity};
use crate::error::{Error, Result};
use crate::features::{
    color_feature, leaf_features, tree_similarity, ColorClass, FeatureVector, LeafFeatures, SimilaritySpec,
};
use crate::learners::train_tree;

/// Similarity representation of one image under a [`SimilaritySpec`].
#[derive(Clone, Debug, PartialEq)]
pub enum ExpertPoint {
    Color(Option<ColorClass>),
    Features(FeatureVector<f64>),
}

/// Runtime dispatch over the similarities the harness supports.
#[derive(Clone, Debug)]
pub struct ExpertSimilarity {
    spec: SimilaritySpec<f64>,
}

impl ExpertSimilarity {
    pub fn new(spec: SimilaritySpec<f64>) -> Result<Self> {
        match spec {
            SimilaritySpec::Color(_) | SimilaritySpec::LeafTree { .. } => Ok(Self { spec }),
            other => Err(Error::Config(format!(
                "similarity {other:?} cannot be computed from single images"
            ))),
        }
    }

    pub fn spec(&self) -> &SimilaritySpec<f64> {
        &self.spec
    }

    pub fn point(&self, img: &Image) -> Result<ExpertPoint> {
        match &self.spec {
            SimilaritySpec::Color(p) => Ok(ExpertPoint::Color(color_feature(img, p)?)),
            SimilaritySpec::LeafTree { leaf, .. } => Ok(ExpertPoint::Features(leaf_features(img, leaf)?.to_vector())),
            _ => unreachable!("rejected in new"),
        }
    }
}

impl Similarity<f64> for ExpertSimilarity {
    type Point = ExpertPoint;

    fn score(&self, a: &ExpertPoint, b: &ExpertPoint) -> f64 {
        match (&self.spec, a, b) {
            (SimilaritySpec::Color(_), ExpertPoint::Color(Some(x)), ExpertPoint::Color(Some(y))) if x == y => 1.0,
            (SimilaritySpec::LeafTree { tree, .. }, ExpertPoint::Features(x), ExpertPoint::Features(y)) => {
                tree_similarity(x, y, tree).unwrap_or(0.0)
            }
            _ => 0.0,
        }
    }
}

/// Per-channel means over a `grid × grid` tiling, in `[0, 1]`.
pub fn pixel_features(img: &Image, grid: usize) -> Vec<f64> {
    let (h, w) = (img.height(), img.width());
    let mut sums = vec![0.0; grid * grid * 3];
    let mut counts = vec![0usize; grid * grid];
    for r in 0..h {
        let gr = r * grid / h.max(1);
        for c in 0..w {
            let cell = gr * grid + c * grid / w.max(1);
            let p = img.get(r, c);
            counts[cell] += 1;
            for ch in 0..3 {
                sums[cell * 3 + ch] += p[ch] as f64;
            }
        }
    }
    sums.iter()
        .enumerate()
        .map(|(i, s)| if counts[i / 3] == 0 { 0.0 } else { s / (counts[i / 3] as f64 * 255.0) })
        .collect()
}

pub fn pixel_schema(grid: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(grid * grid * 3);
    for r in 0..grid {
        for c in 0..grid {
            for ch in ["r", "g", "b"] {
                names.push(format!("px_{r}_{c}_{ch}"));
            }
        }
    }
    names
}

fn expert_input(point: &ExpertPoint) -> Vec<f64> {
    match point {
        ExpertPoint::Color(c) => {
            let mut v = vec![0.0; 4];
            v[c.map_or(3, |c| c.channel())] = 1.0;
            v
        }
        ExpertPoint::Features(f) => f.values.clone(),
    }
}

/// Turns images into (similarity point, classifier input) pairs.
#[derive(Clone, Debug)]
pub struct Featurizer {
    pub similarity: ExpertSimilarity,
    pub input: InputConfig,
}

impl Featurizer {
    pub fn schema(&self) -> Vec<String> {
        match (self.input, self.similarity.spec()) {
            (InputConfig::Pixels { grid }, _) => pixel_schema(grid),
            (InputConfig::Expert, SimilaritySpec::Color(_)) => {
                ["red", "green", "blue", "none"].map(String::from).to_vec()
            }
            (InputConfig::Expert, _) => LeafFeatures::SCHEMA.map(String::from).to_vec(),
        }
    }

    pub fn featurize(&self, img: &Image) -> Result<(ExpertPoint, Vec<f64>)> {
        let point = self.similarity.point(img)?;
        let input = match self.input {
            InputConfig::Pixels { grid } => pixel_features(img, grid),
            InputConfig::Expert => expert_input(&point),
        };
        Ok((point, input))
    }
}

/// Featurized training split.
pub struct TrainingSet {
    pub points: Vec<ExpertPoint>,
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub schema: Vec<String>,
    pub classes: Vec<String>,
    pub featurizer: Featurizer,
}

/// Featurizes the training split. Tree similarities first fit their tree on
/// the leaf features and labels of the same split.
pub fn featurize_training(source: &dyn ImageSource, similarity: &SimilarityConfig, input: InputConfig) -> Result<TrainingSet> {
    if source.is_empty() {
        return Err(Error::Input("training set is empty".into()));
    }
    let labels = source.labels();
    let classes = source.classes().to_vec();
    let spec = match similarity {
        SimilarityConfig::Color(p) => {
            p.validate()?;
            SimilaritySpec::Color(*p)
        }
        SimilarityConfig::LeafTree { leaf, tree } => {
            let feats = (0..source.len())
                .into_par_iter()
                .map(|i| Ok(leaf_features(&source.image(i)?, leaf)?.to_vector::<f64>()))
                .collect::<Result<Vec<_>>>()?;
            let tree = train_tree(&feats, &labels, classes.len(), tree)?;
            SimilaritySpec::LeafTree { leaf: *leaf, tree }
        }
    };
    let featurizer = Featurizer {
        similarity: ExpertSimilarity::new(spec)?,
        input,
    };
    let (points, inputs): (Vec<_>, Vec<_>) = (0..source.len())
        .into_par_iter()
        .map(|i| featurizer.featurize(&source.image(i)?))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(TrainingSet {
        points,
        inputs,
        labels,
        schema: featurizer.schema(),
        classes,
        featurizer,
    })
}
