use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::core::Image;
use crate::error::{Error, Result};
use crate::features::{hsv_to_rgb01, rgb01_to_hsv};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    GaussianNoise,
    ShotNoise,
    ImpulseNoise,
    Brightness,
    Contrast,
    Saturate,
    Pixelate,
    GaussianBlur,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 8] = [
        CorruptionKind::GaussianNoise,
        CorruptionKind::ShotNoise,
        CorruptionKind::ImpulseNoise,
        CorruptionKind::Brightness,
        CorruptionKind::Contrast,
        CorruptionKind::Saturate,
        CorruptionKind::Pixelate,
        CorruptionKind::GaussianBlur,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorruptionKind::GaussianNoise => "gaussian_noise",
            CorruptionKind::ShotNoise => "shot_noise",
            CorruptionKind::ImpulseNoise => "impulse_noise",
            CorruptionKind::Brightness => "brightness",
            CorruptionKind::Contrast => "contrast",
            CorruptionKind::Saturate => "saturate",
            CorruptionKind::Pixelate => "pixelate",
            CorruptionKind::GaussianBlur => "gaussian_blur",
        }
    }

    /// Parameter value under which the corruption leaves images unchanged.
    pub fn identity_parameter(self) -> f64 {
        match self {
            CorruptionKind::GaussianNoise | CorruptionKind::ImpulseNoise | CorruptionKind::Brightness => 0.0,
            CorruptionKind::GaussianBlur => 0.0,
            CorruptionKind::ShotNoise => f64::INFINITY,
            CorruptionKind::Contrast | CorruptionKind::Saturate | CorruptionKind::Pixelate => 1.0,
        }
    }

    fn index(self) -> u64 {
        Self::ALL.iter().position(|&k| k == self).expect("listed") as u64
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown corruption kind '{s}'")))
    }
}

/// Per-severity parameters, severity 1 first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeverityTable {
    pub gaussian_noise: [f64; 5],
    pub shot_noise: [f64; 5],
    pub impulse_noise: [f64; 5],
    pub brightness: [f64; 5],
    pub contrast: [f64; 5],
    pub saturate: [f64; 5],
    pub pixelate: [f64; 5],
    pub gaussian_blur: [f64; 5],
}

impl Default for SeverityTable {
    fn default() -> Self {
        Self {
            gaussian_noise: [0.08, 0.12, 0.18, 0.26, 0.38],
            shot_noise: [60.0, 25.0, 12.0, 5.0, 3.0],
            impulse_noise: [0.03, 0.06, 0.09, 0.17, 0.27],
            brightness: [0.1, 0.2, 0.3, 0.4, 0.5],
            contrast: [0.4, 0.3, 0.2, 0.1, 0.05],
            saturate: [0.3, 0.1, 2.0, 5.0, 20.0],
            pixelate: [0.6, 0.5, 0.4, 0.3, 0.25],
            gaussian_blur: [1.0, 2.0, 3.0, 4.0, 6.0],
        }
    }
}

impl SeverityTable {
    pub fn parameter(&self, kind: CorruptionKind, severity: u8) -> Result<f64> {
        check_severity(severity)?;
        let row = match kind {
            CorruptionKind::GaussianNoise => &self.gaussian_noise,
            CorruptionKind::ShotNoise => &self.shot_noise,
            CorruptionKind::ImpulseNoise => &self.impulse_noise,
            CorruptionKind::Brightness => &self.brightness,
            CorruptionKind::Contrast => &self.contrast,
            CorruptionKind::Saturate => &self.saturate,
            CorruptionKind::Pixelate => &self.pixelate,
            CorruptionKind::GaussianBlur => &self.gaussian_blur,
        };
        Ok(row[severity as usize - 1])
    }
}

fn check_severity(severity: u8) -> Result<()> {
    if !(1..=5).contains(&severity) {
        return Err(Error::Input(format!("severity {severity} outside 1..=5")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub severity: u8,
    pub seed: u64,
}

impl CorruptionSpec {
    /// Spec for item `index` of a dataset corrupted under `seed`; every
    /// (kind, severity, item) triple gets its own stream.
    pub fn for_item(kind: CorruptionKind, severity: u8, seed: u64, index: usize) -> Self {
        Self {
            kind,
            severity,
            seed: rng::derive_seed(seed, &[kind.index(), severity as u64, index as u64]),
        }
    }
}

pub fn corrupt(img: &Image, spec: &CorruptionSpec) -> Result<Image> {
    corrupt_with(img, spec, &SeverityTable::default())
}

pub fn corrupt_with(img: &Image, spec: &CorruptionSpec, table: &SeverityTable) -> Result<Image> {
    let param = table.parameter(spec.kind, spec.severity)?;
    apply_corruption(img, spec.kind, param, spec.seed)
}

type Buf = Vec<[f64; 3]>;

/// Applies `kind` with an explicit parameter on a `[0, 1]` copy of the
/// image, then clamps and re-quantizes.
pub fn apply_corruption(img: &Image, kind: CorruptionKind, param: f64, seed: u64) -> Result<Image> {
    if param.is_nan() || param < 0.0 {
        return Err(Error::Input(format!("{kind} parameter {param} must be nonnegative")));
    }
    let mut buf: Buf = img
        .pixels()
        .iter()
        .map(|p| p.map(|c| c as f64 / 255.0))
        .collect();
    let mut r = rng::stream(seed, &[]);
    let (h, w) = (img.height(), img.width());
    match kind {
        CorruptionKind::GaussianNoise => {
            if param > 0.0 {
                let normal = Normal::new(0.0, param).map_err(|e| Error::Input(e.to_string()))?;
                buf.iter_mut().flatten().for_each(|v| *v += normal.sample(&mut r));
            }
        }
        CorruptionKind::ShotNoise => {
            if param.is_finite() {
                if param == 0.0 {
                    return Err(Error::Input("shot_noise rate must be positive".into()));
                }
                for v in buf.iter_mut().flatten() {
                    let mean = v.clamp(0.0, 1.0) * param;
                    *v = if mean > 0.0 {
                        let p = Poisson::new(mean).map_err(|e| Error::Input(e.to_string()))?;
                        p.sample(&mut r) / param
                    } else {
                        0.0
                    };
                }
            }
        }
        CorruptionKind::ImpulseNoise => {
            for v in buf.iter_mut().flatten() {
                if r.gen::<f64>() < param {
                    *v = if r.gen::<bool>() { 1.0 } else { 0.0 };
                }
            }
        }
        CorruptionKind::Brightness => map_hsv(&mut buf, |(hh, s, v)| (hh, s, (v + param).min(1.0))),
        CorruptionKind::Saturate => map_hsv(&mut buf, |(hh, s, v)| (hh, (s * param).min(1.0), v)),
        CorruptionKind::Contrast => {
            for ch in 0..3 {
                let mean = buf.iter().map(|p| p[ch]).sum::<f64>() / buf.len().max(1) as f64;
                buf.iter_mut().for_each(|p| p[ch] = (p[ch] - mean) * param + mean);
            }
        }
        CorruptionKind::Pixelate => {
            if param == 0.0 || param > 1.0 {
                return Err(Error::Input(format!("pixelate factor {param} must lie in (0, 1]")));
            }
            buf = pixelate(&buf, h, w, param);
        }
        CorruptionKind::GaussianBlur => {
            if param > 0.0 {
                buf = gaussian_blur(&buf, h, w, param);
            }
        }
    }
    let pixels = buf
        .iter()
        .map(|p| p.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8))
        .collect();
    Image::new(h, w, pixels)
}

fn map_hsv(buf: &mut Buf, f: impl Fn((f64, f64, f64)) -> (f64, f64, f64)) {
    for p in buf.iter_mut() {
        let (h, s, v) = f(rgb01_to_hsv(p[0], p[1], p[2]));
        let (r, g, b) = hsv_to_rgb01(h, s, v);
        *p = [r, g, b];
    }
}

fn pixelate(buf: &Buf, h: usize, w: usize, factor: f64) -> Buf {
    let hs = ((h as f64 * factor).round() as usize).max(1);
    let ws = ((w as f64 * factor).round() as usize).max(1);
    let cell_r: Vec<usize> = (0..h).map(|r| r * hs / h).collect();
    let cell_c: Vec<usize> = (0..w).map(|c| c * ws / w).collect();
    let mut sums = vec![[0.0; 3]; hs * ws];
    let mut counts = vec![0usize; hs * ws];
    for r in 0..h {
        for c in 0..w {
            let k = cell_r[r] * ws + cell_c[c];
            counts[k] += 1;
            for ch in 0..3 {
                sums[k][ch] += buf[r * w + c][ch];
            }
        }
    }
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let k = cell_r[r] * ws + cell_c[c];
            out.push(sums[k].map(|s| s / counts[k] as f64));
        }
    }
    out
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|k| k / total).collect()
}

fn gaussian_blur(buf: &Buf, h: usize, w: usize, sigma: f64) -> Buf {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let pass = |src: &Buf, along_rows: bool| -> Buf {
        let mut out = vec![[0.0; 3]; h * w];
        for r in 0..h {
            for c in 0..w {
                let mut acc = [0.0; 3];
                for (k, &wt) in kernel.iter().enumerate() {
                    let off = k as i64 - radius;
                    let (rr, cc) = if along_rows {
                        ((r as i64 + off).clamp(0, h as i64 - 1) as usize, c)
                    } else {
                        (r, (c as i64 + off).clamp(0, w as i64 - 1) as usize)
                    };
                    let p = src[rr * w + cc];
                    for ch in 0..3 {
                        acc[ch] += wt * p[ch];
                    }
                }
                out[r * w + c] = acc;
            }
        }
        out
    };
    pass(&pass(buf, false), true)
}
