use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{Image, LabeledDataset, Rgb};
use crate::error::{Error, Result};
use crate::rng;

/// Uniform center on `[w/2, L - w/2]²`.
pub fn sample_patch_center<R: Rng + ?Sized>(side: usize, patch: usize, rng: &mut R) -> (f64, f64) {
    let lo = patch as f64 / 2.0;
    let hi = side as f64 - lo;
    (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi))
}

/// Black `L × L` image with a `w × w` patch of `alpha` whose top-left corner
/// is `(round(x - w/2), round(y - w/2))`; `x` is the row coordinate.
pub fn render_color_image(alpha: Rgb, x: f64, y: f64, side: usize, patch: usize) -> Image {
    let mut img = Image::filled(side, side, [0, 0, 0]);
    let max_start = side.saturating_sub(patch) as f64;
    let start = |c: f64| (c - patch as f64 / 2.0).round().clamp(0.0, max_start) as usize;
    let (r0, c0) = (start(x), start(y));
    for r in r0..r0 + patch.min(side) {
        for c in c0..c0 + patch.min(side) {
            img.set(r, c, alpha);
        }
    }
    img
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn tag(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Test => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColorDatasetSpec {
    /// Image side `L`.
    pub side: usize,
    /// Patch side `w`.
    pub patch: usize,
    pub alphas: Vec<Rgb>,
    pub classes: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl Default for ColorDatasetSpec {
    fn default() -> Self {
        Self {
            side: 500,
            patch: 50,
            alphas: vec![[255, 0, 0], [0, 255, 0], [0, 0, 255]],
            classes: vec!["red".into(), "green".into(), "blue".into()],
            n_train: 1000,
            n_test: 100,
            seed: 0,
        }
    }
}

impl ColorDatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.patch > 0 && self.patch < self.side) {
            return Err(Error::Config(format!(
                "need 0 < w < L, got w = {}, L = {}",
                self.patch, self.side
            )));
        }
        if self.alphas.is_empty() {
            return Err(Error::Config("at least one class color is required".into()));
        }
        for (i, a) in self.alphas.iter().enumerate() {
            if self.alphas[..i].contains(a) {
                return Err(Error::Config(format!("duplicate class color {a:?}")));
            }
        }
        if self.classes.len() != self.alphas.len() {
            return Err(Error::Config(format!(
                "{} class names for {} colors",
                self.classes.len(),
                self.alphas.len()
            )));
        }
        Ok(())
    }

    pub fn per_class(&self, split: Split) -> usize {
        match split {
            Split::Train => self.n_train,
            Split::Test => self.n_test,
        }
    }

    pub fn len(&self, split: Split) -> usize {
        self.per_class(split) * self.alphas.len()
    }

    /// Items are grouped by class: index `c · per_class + i`.
    pub fn label(&self, split: Split, index: usize) -> usize {
        index / self.per_class(split)
    }

    pub fn center(&self, split: Split, index: usize) -> (f64, f64) {
        let mut r = rng::stream(self.seed, &[split.tag(), index as u64]);
        sample_patch_center(self.side, self.patch, &mut r)
    }

    /// Renders one item on demand; the full default dataset would not fit
    /// comfortably in memory.
    pub fn item(&self, split: Split, index: usize) -> (Image, usize) {
        let label = self.label(split, index);
        let (x, y) = self.center(split, index);
        (render_color_image(self.alphas[label], x, y, self.side, self.patch), label)
    }
}

pub fn generate_color_dataset(spec: &ColorDatasetSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    spec.validate()?;
    let build = |split| {
        let items = (0..spec.len(split))
            .into_par_iter()
            .map(|i| spec.item(split, i))
            .collect();
        LabeledDataset::new(items, spec.classes.clone())
    };
    Ok((build(Split::Train)?, build(Split::Test)?))
}
