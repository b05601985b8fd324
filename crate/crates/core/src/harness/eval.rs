use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::ImageSource;
use super::featurize::{ExpertPoint, ExpertSimilarity, Featurizer};
use crate::core::{select_memory, MemoryClassifier, MemorySet};
use crate::error::{Error, Result};
use crate::learners::Model;
use crate::synth::{corrupt_with, CorruptionKind, CorruptionSpec, SeverityTable};

pub const MEMCLASS_MODEL: &str = "memclass";
pub const BASELINE_MODEL: &str = "baseline";

pub trait Predictor: Sync {
    fn name(&self) -> &str;
    fn predict(&self, point: &ExpertPoint, input: &[f64]) -> Result<usize>;
}

/// A memory classifier together with the similarity points of its memories.
pub struct MemoryPredictor {
    classifier: MemoryClassifier<f64>,
    /// Memory `k` is `memory_points[k]`; indices are renumbered `0..q`.
    local: MemorySet<f64>,
    memory_points: Vec<ExpertPoint>,
    similarity: ExpertSimilarity,
}

impl MemoryPredictor {
    pub fn new(classifier: MemoryClassifier<f64>, memory_points: Vec<ExpertPoint>) -> Result<Self> {
        let q = classifier.memory_set().q();
        if memory_points.len() != q {
            return Err(Error::Input(format!("{} memory points for {q} memories", memory_points.len())));
        }
        let local = MemorySet::new((0..q).collect(), classifier.memory_set().thresholds().to_vec())?;
        let similarity = ExpertSimilarity::new(classifier.similarity().clone())?;
        Ok(Self {
            classifier,
            local,
            memory_points,
            similarity,
        })
    }

    /// Picks the memory points out of the full training representation.
    pub fn from_training(classifier: MemoryClassifier<f64>, training_points: &[ExpertPoint]) -> Result<Self> {
        classifier.memory_set().check_against(training_points.len())?;
        let pts = classifier
            .memory_set()
            .indices()
            .iter()
            .map(|&i| training_points[i].clone())
            .collect();
        Self::new(classifier, pts)
    }

    pub fn classifier(&self) -> &MemoryClassifier<f64> {
        &self.classifier
    }

    pub fn slot(&self, point: &ExpertPoint) -> Result<usize> {
        Ok(select_memory(point, &self.local, &self.memory_points, &self.similarity)?.slot(self.local.q()))
    }
}

impl Predictor for MemoryPredictor {
    fn name(&self) -> &str {
        MEMCLASS_MODEL
    }

    fn predict(&self, point: &ExpertPoint, input: &[f64]) -> Result<usize> {
        self.classifier.slot_output(self.slot(point)?, input)
    }
}

pub struct ModelPredictor {
    pub name: String,
    pub model: Model<f64>,
}

impl Predictor for ModelPredictor {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict(&self, _point: &ExpertPoint, input: &[f64]) -> Result<usize> {
        self.model.predict(input)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Clean,
    Corrupted { kind: CorruptionKind, severity: u8 },
}

impl Cell {
    pub fn corruption(&self) -> &'static str {
        match self {
            Cell::Clean => "clean",
            Cell::Corrupted { kind, .. } => kind.name(),
        }
    }

    pub fn severity(&self) -> u8 {
        match self {
            Cell::Clean => 0,
            Cell::Corrupted { severity, .. } => *severity,
        }
    }
}

/// The clean cell followed by every (corruption, severity) pair, ordered by
/// corruption name and then severity.
pub fn evaluation_cells(corruptions: &[CorruptionKind], severities: &[u8]) -> Vec<Cell> {
    let mut kinds = corruptions.to_vec();
    kinds.sort_by_key(|k| k.name());
    kinds.dedup();
    let mut sev = severities.to_vec();
    sev.sort_unstable();
    sev.dedup();
    let mut cells = vec![Cell::Clean];
    for kind in kinds {
        cells.extend(sev.iter().map(|&severity| Cell::Corrupted { kind, severity }));
    }
    cells
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub corruption: String,
    pub severity: u8,
    pub model: String,
    pub accuracy: f64,
    pub oob_rate: f64,
    pub n: usize,
}

/// Accuracy and unknown-prediction rate. An unknown prediction is correct
/// only when the true label is itself outside the training classes.
pub fn score(predictions: &[usize], labels: &[usize], unknown: usize) -> (f64, f64) {
    if predictions.is_empty() {
        return (0.0, 0.0);
    }
    let n = predictions.len() as f64;
    let correct = predictions
        .iter()
        .zip(labels)
        .filter(|(&p, &y)| p == y || (p == unknown && y >= unknown))
        .count();
    let oob = predictions.iter().filter(|&&p| p == unknown).count();
    (correct as f64 / n, oob as f64 / n)
}

/// Maps `labels` (indices into `from`) onto `to` by class name; names
/// missing from `to` map to `to.len()`, the unknown label.
pub fn map_labels(labels: &[usize], from: &[String], to: &[String]) -> Vec<usize> {
    let table: Vec<usize> = from
        .iter()
        .map(|c| to.iter().position(|t| t == c).unwrap_or(to.len()))
        .collect();
    labels.iter().map(|&l| table.get(l).copied().unwrap_or(to.len())).collect()
}

pub struct EvalSetup<'a> {
    pub featurizer: &'a Featurizer,
    pub severity_table: &'a SeverityTable,
    pub seed: u64,
    /// The unknown label, i.e. the number of training classes.
    pub unknown: usize,
}

/// Every predictor sees the same corrupted image per (cell, item), so
/// differences between models come from the models alone.
pub fn evaluate(
    predictors: &[&dyn Predictor],
    source: &dyn ImageSource,
    labels: &[usize],
    cells: &[Cell],
    setup: &EvalSetup<'_>,
) -> Result<Vec<EvalRow>> {
    if labels.len() != source.len() {
        return Err(Error::Input(format!("{} labels for {} items", labels.len(), source.len())));
    }
    let expected = setup.featurizer.schema().len();
    let mut rows = Vec::with_capacity(cells.len() * predictors.len());
    for cell in cells {
        let preds = (0..source.len())
            .into_par_iter()
            .map(|i| {
                let img = source.image(i)?;
                let img = match *cell {
                    Cell::Clean => img,
                    Cell::Corrupted { kind, severity } => {
                        let spec = CorruptionSpec::for_item(kind, severity, setup.seed, i);
                        corrupt_with(&img, &spec, setup.severity_table)?
                    }
                };
                let (point, input) = setup.featurizer.featurize(&img)?;
                if input.len() != expected {
                    return Err(Error::Schema {
                        expected,
                        got: input.len(),
                    });
                }
                predictors.iter().map(|p| p.predict(&point, &input)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, p) in predictors.iter().enumerate() {
            let column: Vec<usize> = preds.iter().map(|row| row[k]).collect();
            let (accuracy, oob_rate) = score(&column, labels, setup.unknown);
            rows.push(EvalRow {
                corruption: cell.corruption().to_string(),
                severity: cell.severity(),
                model: p.name().to_string(),
                accuracy,
                oob_rate,
                n: column.len(),
            });
        }
    }
    Ok(rows)
}
