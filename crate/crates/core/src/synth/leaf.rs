use rand::seq::SliceRandom;
use rand::Rng;

use serde::{Deserialize, Serialize};

use super::color::Split;
use crate::core::{Image, Rgb};
use crate::error::{Error, Result};
use crate::features::{LeafCounts, LeafFeatures};
use crate::rng;

pub const LEAF_GREEN: Rgb = [40, 170, 40];
pub const LEAF_BROWN: Rgb = [140, 60, 0];
pub const LEAF_DISCOLORED: Rgb = [210, 200, 60];

/// Lesions stay at least this far (in pixels) inside the leaf outline.
pub const LESION_MARGIN: f64 = 3.0;

const MIN_BLOB: usize = 100;
const MAX_BLOB: usize = 600;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticLeaf {
    pub image: Image,
    pub counts: LeafCounts,
    pub truth: LeafFeatures,
}

fn ellipse_level(r: usize, c: usize, side: usize, axes: (f64, f64)) -> f64 {
    let center = (side as f64 - 1.0) / 2.0;
    let dr = (r as f64 - center) / axes.0;
    let dc = (c as f64 - center) / axes.1;
    dr * dr + dc * dc
}

/// Renders a green ellipse with semi-axes `axes` (rows, cols) centred in an
/// `L × L` black image and recolours lesion blobs inside it.
///
/// The fractions are target feature values: with `E` leaf pixels, about
/// `E·f/(1 + f_b + f_d)` pixels are recoloured for each fraction `f`, so the
/// ratio to the remaining green pixels is `f`. The returned truth uses the
/// exact recoloured counts.
pub fn generate_synthetic_leaf(
    side: usize,
    axes: (f64, f64),
    brown_fraction: f64,
    discolored_fraction: f64,
    seed: u64,
) -> Result<SyntheticLeaf> {
    if !(brown_fraction >= 0.0 && discolored_fraction >= 0.0 && brown_fraction + discolored_fraction <= 1.0) {
        return Err(Error::Input(format!(
            "fractions must be nonnegative with sum <= 1, got brown {brown_fraction}, discolored {discolored_fraction}"
        )));
    }
    if !(axes.0 > 0.0 && axes.1 > 0.0) {
        return Err(Error::Input(format!("ellipse axes must be positive, got {axes:?}")));
    }
    let mut img = Image::filled(side, side, [0, 0, 0]);
    let mut interior = Vec::new();
    let mut total = 0usize;
    let inner = ((axes.0 - LESION_MARGIN) / axes.0).min((axes.1 - LESION_MARGIN) / axes.1);
    for r in 0..side {
        for c in 0..side {
            let level = ellipse_level(r, c, side, axes);
            if level <= 1.0 {
                img.set(r, c, LEAF_GREEN);
                total += 1;
                if inner > 0.0 && level <= inner * inner {
                    interior.push((r, c));
                }
            }
        }
    }
    if total == 0 {
        return Err(Error::Input("leaf covers no pixels".into()));
    }
    let denom = 1.0 + brown_fraction + discolored_fraction;
    let n_brown = (total as f64 * brown_fraction / denom).round() as usize;
    let n_disc = (total as f64 * discolored_fraction / denom).round() as usize;
    if n_brown + n_disc > interior.len() {
        return Err(Error::Input(format!(
            "{} lesion pixels requested but only {} fit inside the leaf margin",
            n_brown + n_disc,
            interior.len()
        )));
    }

    let mut r = rng::stream(seed, &[]);
    let mut free = vec![false; side * side];
    interior.iter().for_each(|&(y, x)| free[y * side + x] = true);
    let disc = grow_lesions(&mut img, &mut free, &interior, n_disc, LEAF_DISCOLORED, &mut r);
    let brown = grow_lesions(&mut img, &mut free, &interior, n_brown, LEAF_BROWN, &mut r);
    let counts = LeafCounts {
        green: total - brown - disc,
        brown,
        discolored: disc,
    };
    Ok(SyntheticLeaf {
        image: img,
        truth: counts.features(),
        counts,
    })
}

/// Recolours `target` free pixels as roughly round blobs of
/// `MIN_BLOB..=MAX_BLOB` pixels, each grown outward from a random free seed.
/// The last blob absorbs any remainder.
fn grow_lesions<R: Rng>(
    img: &mut Image,
    free: &mut [bool],
    interior: &[(usize, usize)],
    target: usize,
    color: Rgb,
    rng: &mut R,
) -> usize {
    let side = img.width();
    let mut painted = 0;
    let mut order = interior.to_vec();
    order.shuffle(rng);
    let mut seeds = order.into_iter();
    while painted < target {
        let Some((sr, sc)) = seeds.find(|&(y, x)| free[y * side + x]) else {
            break;
        };
        let left = target - painted;
        let mut size = rng.gen_range(MIN_BLOB..=MAX_BLOB).min(left);
        if left - size < MIN_BLOB {
            size = left;
        }
        let radius = ((size as f64 / std::f64::consts::PI).sqrt() + 2.0).ceil() as usize;
        let (lo_r, hi_r) = (sr.saturating_sub(radius), (sr + radius).min(side - 1));
        let (lo_c, hi_c) = (sc.saturating_sub(radius), (sc + radius).min(side - 1));
        let mut disk: Vec<(usize, usize, usize)> = Vec::new();
        for y in lo_r..=hi_r {
            for x in lo_c..=hi_c {
                if free[y * side + x] {
                    let d = y.abs_diff(sr).pow(2) + x.abs_diff(sc).pow(2);
                    disk.push((d, y, x));
                }
            }
        }
        disk.sort_unstable();
        for &(_, y, x) in disk.iter().take(size) {
            free[y * side + x] = false;
            img.set(y, x, color);
            painted += 1;
        }
    }
    painted
}

/// Labelled synthetic leaves. Each leaf draws both fractions uniformly from
/// `[0, max_fraction]`; its class is the severity bin
/// `min(classes - 1, floor((F_d + F_b) / bin_width))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LeafDatasetSpec {
    pub side: usize,
    pub max_fraction: f64,
    pub bin_width: f64,
    pub classes: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl Default for LeafDatasetSpec {
    fn default() -> Self {
        Self {
            side: 128,
            max_fraction: 0.5,
            bin_width: 0.2,
            classes: (0..5).map(|i| format!("sv{i}")).collect(),
            n_train: 500,
            n_test: 100,
            seed: 0,
        }
    }
}

impl LeafDatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.side < 16 {
            return Err(Error::Config(format!("leaf images need side >= 16, got {}", self.side)));
        }
        if !(self.max_fraction >= 0.0 && self.max_fraction <= 0.5) {
            return Err(Error::Config(format!("max_fraction {} outside [0, 0.5]", self.max_fraction)));
        }
        if !(self.bin_width > 0.0) || self.classes.is_empty() {
            return Err(Error::Config("need a positive bin width and at least one class".into()));
        }
        Ok(())
    }

    pub fn len(&self, split: Split) -> usize {
        match split {
            Split::Train => self.n_train,
            Split::Test => self.n_test,
        }
    }

    pub fn leaf(&self, split: Split, index: usize) -> Result<SyntheticLeaf> {
        let tag = match split {
            Split::Train => 0,
            Split::Test => 1,
        };
        let seed = rng::derive_seed(self.seed, &[tag, index as u64]);
        let mut r = rng::stream(seed, &[0]);
        let fb = r.gen_range(0.0..=self.max_fraction);
        let fd = r.gen_range(0.0..=self.max_fraction);
        let a = self.side as f64 * r.gen_range(0.36..=0.44);
        let b = a * r.gen_range(0.6..=0.8);
        generate_synthetic_leaf(self.side, (a, b), fb, fd, seed)
    }

    pub fn label_of(&self, truth: &LeafFeatures) -> usize {
        let bin = ((truth.discolored + truth.brown) / self.bin_width).floor() as usize;
        bin.min(self.classes.len() - 1)
    }

    pub fn item(&self, split: Split, index: usize) -> Result<(Image, usize)> {
        let leaf = self.leaf(split, index)?;
        let label = self.label_of(&leaf.truth);
        Ok((leaf.image, label))
    }
}
