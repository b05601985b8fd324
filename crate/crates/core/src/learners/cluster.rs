use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logistic::fit_logistic;
use super::model::{fit_model, Model, ModelKind};
use super::samples::Samples;
use crate::core::{select_memory, MemoryClassifier, MemorySet, Similarity};
use crate::error::{Error, Result};
use crate::features::SimilaritySpec;
use crate::scalar::Scalar;

/// One memory's training cluster and the accuracy of its classifier on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedCluster {
    pub memory: usize,
    pub members: Vec<usize>,
    pub training_accuracy: f64,
    /// True when the cluster was empty and holds the global-majority fallback.
    pub fallback: bool,
}

pub struct MemoryTraining<T: Scalar> {
    pub classifier: MemoryClassifier<T>,
    pub clusters: Vec<TrainedCluster>,
    /// Training points that no memory accepted.
    pub out_of_boundary: Vec<usize>,
}

/// Assigns every training point to its selected memory and fits one model per
/// cluster. Empty clusters get the global-majority model.
///
/// `points[i]` and `samples.row(i)` describe the same training item.
#[allow(clippy::too_many_arguments)]
pub fn train_memory_classifier<T, S>(
    points: &[S::Point],
    samples: &Samples<'_, T>,
    classes: Vec<String>,
    sim: &S,
    similarity: SimilaritySpec<T>,
    memories: MemorySet<T>,
    kind: &ModelKind,
) -> Result<MemoryTraining<T>>
where
    T: Scalar,
    S: Similarity<T>,
{
    if points.len() != samples.len() {
        return Err(Error::Input(format!(
            "{} similarity points but {} samples",
            points.len(),
            samples.len()
        )));
    }
    let n_classes = classes.len();
    samples.check_labels(n_classes)?;
    memories.check_against(points.len())?;
    let q = memories.q();

    let slots = points
        .par_iter()
        .map(|p| Ok(select_memory(p, &memories, points, sim)?.slot(q)))
        .collect::<Result<Vec<usize>>>()?;
    let mut members = vec![Vec::new(); q + 1];
    for (i, &slot) in slots.iter().enumerate() {
        members[slot].push(i);
    }
    let out_of_boundary = members.pop().unwrap_or_default();

    let global_majority = Model::majority(samples, n_classes)?;
    let warm = match kind {
        ModelKind::Logistic(p) if p.warm_start => Some(fit_logistic(samples, n_classes, p, None)?.model),
        _ => None,
    };

    let trained = members
        .par_iter()
        .map(|m| {
            if m.is_empty() {
                return Ok((global_majority.clone(), 0.0, true));
            }
            let subset = samples.subset(m);
            let model = fit_model(kind, &subset, n_classes, warm.as_ref())?;
            let acc = model.accuracy(&subset)?;
            Ok((model, acc, false))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut classifiers = Vec::with_capacity(q);
    let mut clusters = Vec::with_capacity(q);
    for ((model, acc, fallback), (&memory, m)) in trained.into_iter().zip(memories.indices().iter().zip(members)) {
        classifiers.push(model);
        clusters.push(TrainedCluster {
            memory,
            members: m,
            training_accuracy: acc,
            fallback,
        });
    }
    Ok(MemoryTraining {
        classifier: MemoryClassifier::new(memories, classifiers, similarity, classes)?,
        clusters,
        out_of_boundary,
    })
}
