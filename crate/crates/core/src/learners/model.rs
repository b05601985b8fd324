use serde::{Deserialize, Serialize};

use super::logistic::{fit_logistic, LogisticModel, LogisticParams};
use super::samples::{majority_class, Samples};
use super::tree::{fit_tree, DecisionTree, TreeParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which learner to train for each cluster (and for the global baseline).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Majority,
    Tree(TreeParams),
    Logistic(LogisticParams),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Majority => "majority",
            ModelKind::Tree(_) => "tree",
            ModelKind::Logistic(_) => "logistic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Model<T> {
    Tree(DecisionTree<T>),
    Logistic(LogisticModel<T>),
    Majority { class: usize, n_features: usize },
}

impl<T: Scalar> Model<T> {
    pub fn predict(&self, x: &[T]) -> Result<usize> {
        match self {
            Model::Tree(t) => t.predict(x),
            Model::Logistic(m) => m.predict(x),
            Model::Majority { class, n_features } => {
                if x.len() != *n_features {
                    return Err(Error::Schema {
                        expected: *n_features,
                        got: x.len(),
                    });
                }
                Ok(*class)
            }
        }
    }

    pub fn majority(samples: &Samples<'_, T>, n_classes: usize) -> Result<Self> {
        samples.check_labels(n_classes)?;
        Ok(Model::Majority {
            class: majority_class(&samples.class_counts(n_classes)),
            n_features: samples.n_features(),
        })
    }

    pub fn accuracy(&self, samples: &Samples<'_, T>) -> Result<f64> {
        if samples.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0;
        for i in 0..samples.len() {
            if self.predict(samples.row(i))? == samples.labels()[i] {
                correct += 1;
            }
        }
        Ok(correct as f64 / samples.len() as f64)
    }
}

pub fn fit_model<T: Scalar>(
    kind: &ModelKind,
    samples: &Samples<'_, T>,
    n_classes: usize,
    warm_start: Option<&LogisticModel<T>>,
) -> Result<Model<T>> {
    if samples.is_empty() {
        return Err(Error::Input("cannot fit a model on no samples".into()));
    }
    Ok(match kind {
        ModelKind::Majority => Model::majority(samples, n_classes)?,
        ModelKind::Tree(p) => Model::Tree(fit_tree(samples, n_classes, p)?),
        ModelKind::Logistic(p) => Model::Logistic(fit_logistic(samples, n_classes, p, warm_start)?.model),
    })
}
