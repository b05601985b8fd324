use serde::{Deserialize, Serialize};

use crate::core::{Image, Rgb};
use crate::error::{Error, Result};

const HIST_BINS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LesionParams {
    pub median_lesion_size: f64,
    pub overexposure_threshold: u8,
}

impl Default for LesionParams {
    fn default() -> Self {
        Self {
            median_lesion_size: 400.0,
            overexposure_threshold: 250,
        }
    }
}

/// Lesion size, redness relative to surrounding skin, and over-exposure flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LesionFeatures {
    pub size: f64,
    pub redness: f64,
    pub saturated: f64,
}

fn is_masked(p: &Rgb) -> bool {
    *p != [0, 0, 0]
}

fn red_histogram(img: &Image) -> [f64; HIST_BINS] {
    let mut hist = [0.0; HIST_BINS];
    let mut n = 0.0;
    for p in img.pixels().iter().filter(|p| is_masked(p)) {
        hist[usize::from(p[0]) * HIST_BINS / 256] += 1.0;
        n += 1.0;
    }
    if n > 0.0 {
        hist.iter_mut().for_each(|v| *v /= n);
    }
    hist
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

/// `Sz`, `Rd`, `Sat` for a lesion crop (black pixels are outside the lesion
/// mask) against a patch of neighbouring skin.
pub fn lesion_features(
    crop: &Image,
    neighbor_patch: &Image,
    params: &LesionParams,
) -> Result<LesionFeatures> {
    if !(params.median_lesion_size > 0.0) {
        return Err(Error::Input("median lesion size must be positive".into()));
    }
    if crop.is_empty() || neighbor_patch.is_empty() {
        return Err(Error::Input("lesion crop and neighbor patch must be nonempty".into()));
    }
    let masked: Vec<&Rgb> = crop.pixels().iter().filter(|p| is_masked(p)).collect();
    let size = masked.len() as f64 / params.median_lesion_size;

    let redness = pearson(&red_histogram(crop), &red_histogram(neighbor_patch))
        .map_or(0.0, |rho| (1.0 - rho).clamp(0.0, 1.0));

    let bright = masked
        .iter()
        .filter(|p| p.iter().min().copied().unwrap_or(0) >= params.overexposure_threshold)
        .count();
    let saturated = if !masked.is_empty() && bright as f64 / masked.len() as f64 > 0.5 {
        1.0
    } else {
        0.0
    };
    Ok(LesionFeatures {
        size,
        redness,
        saturated,
    })
}
