use serde::{Deserialize, Serialize};

use super::samples::Samples;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scalar::{pairwise_sum, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Weight each sample's loss by the inverse frequency of its class.
    pub class_weighting: bool,
    /// Start per-cluster models from a model fit on all training data.
    pub warm_start: bool,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.5,
            class_weighting: false,
            warm_start: false,
        }
    }
}

/// Multinomial logistic regression. `weights` is row-major `C × (d + 1)` with
/// the bias in the last column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LogisticModel<T> {
    weights: Vec<T>,
    n_classes: usize,
    schema: Vec<String>,
}

impl<T: Scalar> LogisticModel<T> {
    pub fn zeros(n_classes: usize, schema: Vec<String>) -> Self {
        Self {
            weights: vec![T::zero(); n_classes * (schema.len() + 1)],
            n_classes,
            schema,
        }
    }

    pub fn from_weights(weights: Vec<T>, n_classes: usize, schema: Vec<String>) -> Result<Self> {
        if weights.len() != n_classes * (schema.len() + 1) {
            return Err(Error::Input(format!(
                "{} weights for {} classes and {} features",
                weights.len(),
                n_classes,
                schema.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Input("non-finite logistic weight".into()));
        }
        Ok(Self {
            weights,
            n_classes,
            schema,
        })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn probabilities(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.schema.len() {
            return Err(Error::Schema {
                expected: self.schema.len(),
                got: x.len(),
            });
        }
        Ok(softmax_probs(&self.weights, self.n_classes, x))
    }

    /// Most probable class; smallest index on ties.
    pub fn predict(&self, x: &[T]) -> Result<usize> {
        let p = self.probabilities(x)?;
        let mut best = 0;
        for (c, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = c;
            }
        }
        Ok(best)
    }
}

fn softmax_probs<T: Scalar>(weights: &[T], n_classes: usize, x: &[T]) -> Vec<T> {
    let stride = x.len() + 1;
    let logits: Vec<T> = (0..n_classes)
        .map(|c| {
            let row = &weights[c * stride..(c + 1) * stride];
            row[..x.len()]
                .iter()
                .zip(x)
                .fold(row[x.len()], |acc, (&w, &v)| acc + w * v)
        })
        .collect();
    let max = logits.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let exp: Vec<T> = logits.iter().map(|&l| (l - max).exp()).collect();
    let z = exp.iter().fold(T::zero(), |a, &v| a + v);
    exp.into_iter().map(|e| e / z).collect()
}

/// Per-sample loss weights: all ones, or `n / (C_present · n_y)`.
pub fn sample_weights<T: Scalar>(samples: &Samples<'_, T>, n_classes: usize, balanced: bool) -> Vec<T> {
    if !balanced {
        return vec![T::one(); samples.len()];
    }
    let counts = samples.class_counts(n_classes);
    let present = counts.iter().filter(|&&c| c > 0).count();
    samples
        .labels()
        .iter()
        .map(|&y| T::of_usize(samples.len()) / T::of_usize(present * counts[y]))
        .collect()
}

/// Weighted mean cross-entropy and its gradient with respect to `weights`.
pub fn loss_and_gradient<T: Scalar>(
    weights: &[T],
    n_classes: usize,
    samples: &Samples<'_, T>,
    sample_weight: &[T],
) -> (T, Vec<T>) {
    let d = samples.n_features();
    let stride = d + 1;
    let mut grad = vec![T::zero(); weights.len()];
    let mut losses = Vec::with_capacity(samples.len());
    for i in 0..samples.len() {
        let x = samples.row(i);
        let y = samples.labels()[i];
        let w = sample_weight[i];
        let p = softmax_probs(weights, n_classes, x);
        losses.push(-w * p[y].max(T::min_positive_value()).ln());
        for c in 0..n_classes {
            let delta = w * (p[c] - if c == y { T::one() } else { T::zero() });
            let row = &mut grad[c * stride..(c + 1) * stride];
            for (g, &v) in row[..d].iter_mut().zip(x) {
                *g = *g + delta * v;
            }
            row[d] = row[d] + delta;
        }
    }
    let total = pairwise_sum(sample_weight);
    let loss = pairwise_sum(&losses) / total;
    grad.iter_mut().for_each(|g| *g = *g / total);
    (loss, grad)
}

pub struct LogisticFit<T> {
    pub model: LogisticModel<T>,
    /// Loss before each update, then the final loss.
    pub loss_history: Vec<T>,
}

/// Full-batch gradient descent on softmax cross-entropy, starting from zero
/// weights (or `init`).
pub fn fit_logistic<T: Scalar>(
    samples: &Samples<'_, T>,
    n_classes: usize,
    params: &LogisticParams,
    init: Option<&LogisticModel<T>>,
) -> Result<LogisticFit<T>> {
    if samples.is_empty() {
        return Err(Error::Input("cannot fit logistic regression on no samples".into()));
    }
    if !(params.learning_rate > 0.0) {
        return Err(Error::Config("learning rate must be positive".into()));
    }
    samples.check_labels(n_classes)?;
    samples.check_finite()?;
    let mut model = match init {
        Some(m) if m.n_classes == n_classes && m.schema == samples.schema() => m.clone(),
        Some(_) => return Err(Error::Input("warm-start model does not match the data".into())),
        None => LogisticModel::zeros(n_classes, samples.schema().to_vec()),
    };
    let sw = sample_weights(samples, n_classes, params.class_weighting);
    let lr = T::of(params.learning_rate);
    let mut loss_history = Vec::with_capacity(params.epochs + 1);
    for _ in 0..params.epochs {
        let (loss, grad) = loss_and_gradient(&model.weights, n_classes, samples, &sw);
        loss_history.push(loss);
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w = *w - lr * *g;
        }
    }
    loss_history.push(loss_and_gradient(&model.weights, n_classes, samples, &sw).0);
    if model.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Domain("logistic training diverged".into()));
    }
    Ok(LogisticFit {
        model,
        loss_history,
    })
}

pub fn train_logistic<T: Scalar>(
    features: &[FeatureVector<T>],
    labels: &[usize],
    n_classes: usize,
    params: &LogisticParams,
) -> Result<LogisticModel<T>> {
    Ok(fit_logistic(&Samples::from_vectors(features, labels)?, n_classes, params, None)?.model)
}
