//! Domain types and the two-stage inference path: pick the most similar
//! memory (or the out-of-boundary slot), then apply that slot's classifier.

mod dataset;
mod image;

use serde::{Deserialize, Serialize};

pub use self::dataset::LabeledDataset;
pub use self::image::{Image, Rgb};
use crate::error::{Error, Result};
use crate::features::SimilaritySpec;
use crate::learners::Model;
use crate::scalar::Scalar;

/// Expert similarity score `s(a, b)` into `[0, 1]`; higher means more alike.
///
/// `Point` is whatever representation the score is computed on (an extracted
/// color class, a feature vector, or just a dataset index for precomputed
/// matrices). Memory selection always calls `score(memory, x)`.
pub trait Similarity<T: Scalar>: Sync {
    type Point: Sync;

    fn score(&self, a: &Self::Point, b: &Self::Point) -> T;
}

impl<T: Scalar, S: Similarity<T> + ?Sized> Similarity<T> for &S {
    type Point = S::Point;

    fn score(&self, a: &Self::Point, b: &Self::Point) -> T {
        (**self).score(a, b)
    }
}

/// `q` distinct training indices with per-memory acceptance thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MemorySet<T> {
    indices: Vec<usize>,
    thresholds: Vec<T>,
}

impl<T: Scalar> MemorySet<T> {
    pub fn new(indices: Vec<usize>, thresholds: Vec<T>) -> Result<Self> {
        if indices.len() != thresholds.len() {
            return Err(Error::Input(format!(
                "{} memories but {} thresholds",
                indices.len(),
                thresholds.len()
            )));
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input("memory indices must be distinct".into()));
        }
        if let Some(b) = thresholds
            .iter()
            .find(|b| !(**b >= T::zero() && **b <= T::one()))
        {
            return Err(Error::Input(format!("threshold {b} outside [0, 1]")));
        }
        Ok(Self {
            indices,
            thresholds,
        })
    }

    /// Every memory gets the same threshold.
    pub fn with_threshold(indices: Vec<usize>, threshold: T) -> Result<Self> {
        let thresholds = vec![threshold; indices.len()];
        Self::new(indices, thresholds)
    }

    pub fn q(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    pub fn check_against(&self, n: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::Config("memory set is empty".into()));
        }
        match self.indices.iter().find(|&&i| i >= n) {
            Some(i) => Err(Error::Input(format!(
                "memory index {i} out of range for {n} datapoints"
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Selection {
    /// Zero-based position in the memory set.
    Memory(usize),
    OutOfBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionResult<T> {
    pub selection: Selection,
    /// Score of the winning memory; when out of boundary, the failed maximum.
    pub score: T,
}

impl<T: Scalar> SelectionResult<T> {
    /// Zero-based selector slot in `0..=q`; slot `q` is out of boundary.
    pub fn slot(&self, q: usize) -> usize {
        match self.selection {
            Selection::Memory(k) => k,
            Selection::OutOfBoundary => q,
        }
    }

    /// The selector `s(x, ·)` as a one-hot vector of length `q + 1`.
    pub fn one_hot(&self, q: usize) -> Vec<T> {
        let mut v = vec![T::zero(); q + 1];
        v[self.slot(q)] = T::one();
        v
    }
}

/// Routes `x` to the memory with the highest `s(m_k, x)` (smallest position
/// on ties), or out of boundary when that score is below the winner's
/// threshold.
pub fn select_memory<T, S>(
    x: &S::Point,
    mem: &MemorySet<T>,
    points: &[S::Point],
    sim: &S,
) -> Result<SelectionResult<T>>
where
    T: Scalar,
    S: Similarity<T> + ?Sized,
{
    mem.check_against(points.len())?;
    let mut best = 0;
    let mut best_score = sim.score(&points[mem.indices[0]], x);
    for (k, &m) in mem.indices.iter().enumerate().skip(1) {
        let s = sim.score(&points[m], x);
        if s > best_score {
            best = k;
            best_score = s;
        }
    }
    let selection = if best_score >= mem.thresholds[best] {
        Selection::Memory(best)
    } else {
        Selection::OutOfBoundary
    };
    Ok(SelectionResult {
        selection,
        score: best_score,
    })
}

pub const MODEL_VERSION: u32 = 1;

/// Deployable memory classifier: memories, one classifier per memory and the
/// implicit out-of-boundary classifier that always answers "unknown".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "T: Scalar",
    into = "ModelDocument<T>",
    try_from = "ModelDocument<T>"
)]
pub struct MemoryClassifier<T: Scalar> {
    memory_set: MemorySet<T>,
    cluster_classifiers: Vec<Model<T>>,
    similarity: SimilaritySpec<T>,
    classes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelDocument<T: Scalar> {
    version: u32,
    similarity: SimilaritySpec<T>,
    memories: Vec<usize>,
    thresholds: Vec<T>,
    classifiers: Vec<Model<T>>,
    classes: Vec<String>,
}

impl<T: Scalar> From<MemoryClassifier<T>> for ModelDocument<T> {
    fn from(mc: MemoryClassifier<T>) -> Self {
        ModelDocument {
            version: MODEL_VERSION,
            similarity: mc.similarity,
            memories: mc.memory_set.indices,
            thresholds: mc.memory_set.thresholds,
            classifiers: mc.cluster_classifiers,
            classes: mc.classes,
        }
    }
}

impl<T: Scalar> TryFrom<ModelDocument<T>> for MemoryClassifier<T> {
    type Error = Error;

    fn try_from(doc: ModelDocument<T>) -> Result<Self> {
        if doc.version != MODEL_VERSION {
            return Err(Error::Input(format!(
                "unsupported model version {}",
                doc.version
            )));
        }
        MemoryClassifier::new(
            MemorySet::new(doc.memories, doc.thresholds)?,
            doc.classifiers,
            doc.similarity,
            doc.classes,
        )
    }
}

impl<T: Scalar> MemoryClassifier<T> {
    pub fn new(
        memory_set: MemorySet<T>,
        cluster_classifiers: Vec<Model<T>>,
        similarity: SimilaritySpec<T>,
        classes: Vec<String>,
    ) -> Result<Self> {
        if cluster_classifiers.len() != memory_set.q() {
            return Err(Error::Input(format!(
                "{} classifiers for {} memories",
                cluster_classifiers.len(),
                memory_set.q()
            )));
        }
        Ok(Self {
            memory_set,
            cluster_classifiers,
            similarity,
            classes,
        })
    }

    pub fn memory_set(&self) -> &MemorySet<T> {
        &self.memory_set
    }

    pub fn cluster_classifiers(&self) -> &[Model<T>] {
        &self.cluster_classifiers
    }

    pub fn similarity(&self) -> &SimilaritySpec<T> {
        &self.similarity
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn unknown_label(&self) -> usize {
        self.classes.len()
    }

    /// `h_k(x)` for a zero-based slot `k ∈ 0..=q`; slot `q` is the
    /// out-of-boundary classifier.
    pub fn slot_output(&self, slot: usize, input: &[T]) -> Result<usize> {
        match self.cluster_classifiers.get(slot) {
            Some(model) => model.predict(input),
            None if slot == self.memory_set.q() => Ok(self.unknown_label()),
            None => Err(Error::Input(format!("slot {slot} out of range"))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Two-stage prediction: `h_k(x)` where `k` is the selected slot.
///
/// `point` is the similarity representation of `x`, `input` the classifier
/// features, and `points` the similarity representations of the training set
/// the memory indices refer to.
pub fn classify<T, S>(
    point: &S::Point,
    input: &[T],
    mc: &MemoryClassifier<T>,
    points: &[S::Point],
    sim: &S,
) -> Result<usize>
where
    T: Scalar,
    S: Similarity<T> + ?Sized,
{
    let sel = select_memory(point, &mc.memory_set, points, sim)?;
    mc.slot_output(sel.slot(mc.memory_set.q()), input)
}
