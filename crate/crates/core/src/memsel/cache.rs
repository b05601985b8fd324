use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::core::Similarity;
use crate::scalar::Scalar;

/// Datasets up to this size get a fully precomputed score matrix.
pub const FULL_CACHE_LIMIT: usize = 2000;

/// Memoized rows `s(m, ·)` of the similarity matrix.
///
/// Small datasets are filled eagerly; larger ones compute a row the first
/// time a point is used as a memory. Row contents do not depend on which
/// thread computes them.
pub struct ScoreCache<'a, T, S: Similarity<T>>
where
    T: Scalar,
{
    points: &'a [S::Point],
    sim: &'a S,
    full: Option<Vec<Arc<Vec<T>>>>,
    rows: RwLock<HashMap<usize, Arc<Vec<T>>>>,
}

impl<'a, T: Scalar, S: Similarity<T>> ScoreCache<'a, T, S> {
    pub fn new(points: &'a [S::Point], sim: &'a S) -> Self {
        Self::with_limit(points, sim, FULL_CACHE_LIMIT)
    }

    pub fn with_limit(points: &'a [S::Point], sim: &'a S, full_limit: usize) -> Self {
        let full = (points.len() <= full_limit).then(|| {
            (0..points.len())
                .into_par_iter()
                .map(|m| Arc::new(Self::compute_row(points, sim, m)))
                .collect()
        });
        Self {
            points,
            sim,
            full,
            rows: RwLock::new(HashMap::new()),
        }
    }

    fn compute_row(points: &[S::Point], sim: &S, m: usize) -> Vec<T> {
        points.iter().map(|x| sim.score(&points[m], x)).collect()
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn is_full(&self) -> bool {
        self.full.is_some()
    }

    /// `s(points[m], points[i])` for every `i`.
    pub fn row(&self, m: usize) -> Arc<Vec<T>> {
        if let Some(full) = &self.full {
            return Arc::clone(&full[m]);
        }
        if let Some(r) = self.rows.read().expect("cache lock").get(&m) {
            return Arc::clone(r);
        }
        let row = Arc::new(Self::compute_row(self.points, self.sim, m));
        self.rows
            .write()
            .expect("cache lock")
            .entry(m)
            .or_insert(row)
            .clone()
    }
}
