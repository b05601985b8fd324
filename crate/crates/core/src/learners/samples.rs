use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scalar::Scalar;

/// Borrowed training rows sharing one feature schema.
#[derive(Clone, Debug)]
pub struct Samples<'a, T> {
    schema: &'a [String],
    rows: Vec<&'a [T]>,
    labels: Vec<usize>,
}

impl<'a, T: Scalar> Samples<'a, T> {
    pub fn new(schema: &'a [String], rows: Vec<&'a [T]>, labels: Vec<usize>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Input(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != schema.len()) {
            return Err(Error::Schema {
                expected: schema.len(),
                got: r.len(),
            });
        }
        Ok(Self {
            schema,
            rows,
            labels,
        })
    }

    pub fn from_vectors(features: &'a [FeatureVector<T>], labels: &[usize]) -> Result<Self> {
        let Some(first) = features.first() else {
            return Err(Error::Input("no training samples".into()));
        };
        if features.iter().any(|f| f.schema != first.schema) {
            return Err(Error::Input("feature vectors disagree on schema".into()));
        }
        Self::new(
            &first.schema,
            features.iter().map(|f| f.values.as_slice()).collect(),
            labels.to_vec(),
        )
    }

    pub fn schema(&self) -> &'a [String] {
        self.schema
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &'a [T] {
        self.rows[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema,
            rows: indices.iter().map(|&i| self.rows[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub(crate) fn check_labels(&self, n_classes: usize) -> Result<()> {
        match self.labels.iter().find(|&&l| l >= n_classes) {
            Some(l) => Err(Error::Input(format!("label {l} out of range for {n_classes} classes"))),
            None => Ok(()),
        }
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.rows.iter().any(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::Input("non-finite feature value".into()));
        }
        Ok(())
    }

    pub fn class_counts(&self, n_classes: usize) -> Vec<usize> {
        let mut counts = vec![0; n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Most frequent class, smallest index on ties.
pub fn majority_class(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}
