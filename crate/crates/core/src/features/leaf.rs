use serde::{Deserialize, Serialize};

use super::hsv::{HsvThresholds, LeafPixel};
use super::hull::{convex_hull, hull_contains, Point};
use crate::core::Image;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LeafParams {
    pub thresholds: HsvThresholds,
    /// Radius of the per-channel median prefilter; 0 disables it.
    pub median_radius: usize,
}

impl Default for LeafParams {
    fn default() -> Self {
        Self {
            thresholds: HsvThresholds::default(),
            median_radius: 2,
        }
    }
}

/// Discolored and brown pixel counts as fractions of the green count inside
/// the convex hull of the green pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafFeatures {
    pub discolored: f64,
    pub brown: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LeafCounts {
    pub green: usize,
    pub brown: usize,
    pub discolored: usize,
}

impl LeafCounts {
    /// Ratios clamped to `[0, 1]`; no green pixels saturates both.
    pub fn features(&self) -> LeafFeatures {
        if self.green == 0 {
            return LeafFeatures {
                discolored: 1.0,
                brown: 1.0,
            };
        }
        let g = self.green as f64;
        LeafFeatures {
            discolored: (self.discolored as f64 / g).min(1.0),
            brown: (self.brown as f64 / g).min(1.0),
        }
    }
}

pub fn leaf_features(img: &Image, params: &LeafParams) -> Result<LeafFeatures> {
    Ok(leaf_counts(img, params)?.features())
}

pub fn leaf_counts(img: &Image, params: &LeafParams) -> Result<LeafCounts> {
    if img.is_empty() {
        return Err(Error::Input("leaf image is empty".into()));
    }
    params.thresholds.validate()?;
    let filtered;
    let img = if params.median_radius > 0 {
        filtered = median_filter(img, params.median_radius);
        &filtered
    } else {
        img
    };
    let (h, w) = (img.height(), img.width());
    let classes: Vec<LeafPixel> = img
        .pixels()
        .iter()
        .map(|&p| params.thresholds.classify(p))
        .collect();

    // Hull vertices come from the largest 8-connected green region, so
    // isolated noise pixels in the background cannot inflate the hull.
    let leaf = largest_component(&classes, h, w, LeafPixel::Green);
    let mut candidates: Vec<Point> = Vec::new();
    for r in 0..h {
        let row = &leaf[r * w..(r + 1) * w];
        let first = row.iter().position(|&c| c);
        let last = row.iter().rposition(|&c| c);
        if let (Some(a), Some(b)) = (first, last) {
            candidates.push((r as i64, a as i64));
            candidates.push((r as i64, b as i64));
        }
    }
    if candidates.is_empty() {
        return Ok(LeafCounts::default());
    }
    let hull = convex_hull(&candidates);
    let rmin = hull.iter().map(|p| p.0).min().unwrap_or(0) as usize;
    let rmax = hull.iter().map(|p| p.0).max().unwrap_or(0) as usize;
    let cmin = hull.iter().map(|p| p.1).min().unwrap_or(0) as usize;
    let cmax = hull.iter().map(|p| p.1).max().unwrap_or(0) as usize;

    let mut counts = LeafCounts::default();
    for r in rmin..=rmax {
        let inside = |c: usize| hull_contains(&hull, (r as i64, c as i64));
        // the hull's row section is an interval
        let Some(lo) = (cmin..=cmax).find(|&c| inside(c)) else {
            continue;
        };
        let hi = (lo..=cmax).rev().find(|&c| inside(c)).unwrap_or(lo);
        for c in lo..=hi {
            match classes[r * w + c] {
                LeafPixel::Green => counts.green += 1,
                LeafPixel::Brown => counts.brown += 1,
                LeafPixel::Discolored => counts.discolored += 1,
                LeafPixel::Other => {}
            }
        }
    }
    Ok(counts)
}

/// Mask of the largest 8-connected region of `target`; the earliest region
/// in scan order wins ties.
fn largest_component(classes: &[LeafPixel], h: usize, w: usize, target: LeafPixel) -> Vec<bool> {
    let mut label = vec![usize::MAX; h * w];
    let mut best = (0usize, usize::MAX);
    let mut stack = Vec::new();
    let mut next = 0;
    for start in 0..h * w {
        if classes[start] != target || label[start] != usize::MAX {
            continue;
        }
        let mut size = 0;
        label[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (r, c) = (i / w, i % w);
            for nr in r.saturating_sub(1)..=(r + 1).min(h - 1) {
                for nc in c.saturating_sub(1)..=(c + 1).min(w - 1) {
                    let j = nr * w + nc;
                    if classes[j] == target && label[j] == usize::MAX {
                        label[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
        if size > best.0 {
            best = (size, next);
        }
        next += 1;
    }
    label.iter().map(|&l| l == best.1).collect()
}

/// Per-channel median over a `(2r+1)²` window with edge clamping.
pub fn median_filter(img: &Image, radius: usize) -> Image {
    let (h, w) = (img.height(), img.width());
    let r = radius as isize;
    let mut out = img.clone();
    let mut window: [Vec<u8>; 3] = Default::default();
    for row in 0..h {
        for col in 0..w {
            for ch in &mut window {
                ch.clear();
            }
            for dr in -r..=r {
                let rr = (row as isize + dr).clamp(0, h as isize - 1) as usize;
                for dc in -r..=r {
                    let cc = (col as isize + dc).clamp(0, w as isize - 1) as usize;
                    let p = img.get(rr, cc);
                    for ch in 0..3 {
                        window[ch].push(p[ch]);
                    }
                }
            }
            let mut px = [0u8; 3];
            for ch in 0..3 {
                let mid = window[ch].len() / 2;
                px[ch] = *window[ch].select_nth_unstable(mid).1;
            }
            out.set(row, col, px);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GREEN: [u8; 3] = [40, 170, 40];
    const BROWN: [u8; 3] = [120, 65, 20];

    fn raw() -> LeafParams {
        LeafParams {
            median_radius: 0,
            ..LeafParams::default()
        }
    }

    #[test]
    fn fully_green_leaf() {
        let mut img = Image::filled(20, 20, [0, 0, 0]);
        for r in 5..15 {
            for c in 3..17 {
                img.set(r, c, GREEN);
            }
        }
        let f = leaf_features(&img, &raw()).unwrap();
        assert_eq!((f.discolored, f.brown), (0.0, 0.0));
    }

    #[test]
    fn hundred_green_ten_brown() {
        // 11x10 block with a brown column hanging from a green top row, so
        // the green stays one region and its hull covers the brown
        let mut img = Image::filled(16, 16, [0, 0, 0]);
        let mut green = 0;
        let mut brown = 0;
        for r in 2..13 {
            for c in 2..12 {
                if c == 7 && r > 2 {
                    img.set(r, c, BROWN);
                    brown += 1;
                } else {
                    img.set(r, c, GREEN);
                    green += 1;
                }
            }
        }
        assert_eq!((green, brown), (100, 10));
        let counts = leaf_counts(&img, &raw()).unwrap();
        assert_eq!(counts, LeafCounts { green: 100, brown: 10, discolored: 0 });
        let f = counts.features();
        assert_eq!((f.discolored, f.brown), (0.0, 0.1));
    }

    #[test]
    fn brown_outnumbering_green_saturates() {
        let mut img = Image::filled(10, 10, BROWN);
        for i in 0..10 {
            for (r, c) in [(0, i), (9, i), (i, 0), (i, 9)] {
                img.set(r, c, GREEN);
            }
        }
        let f = leaf_features(&img, &raw()).unwrap();
        assert_eq!(f.brown, 1.0);
    }

    #[test]
    fn no_green_saturates_both() {
        let img = Image::filled(5, 5, BROWN);
        let f = leaf_features(&img, &raw()).unwrap();
        assert_eq!((f.discolored, f.brown), (1.0, 1.0));
    }

    #[test]
    fn brown_outside_hull_is_ignored() {
        let mut img = Image::filled(10, 10, [0, 0, 0]);
        for r in 0..4 {
            for c in 0..4 {
                img.set(r, c, GREEN);
            }
        }
        img.set(8, 8, BROWN);
        let f = leaf_features(&img, &raw()).unwrap();
        assert_eq!(f.brown, 0.0);
    }

    #[test]
    fn median_filter_keeps_flat_regions_and_removes_specks() {
        let mut img = Image::filled(7, 7, GREEN);
        img.set(3, 3, [255, 0, 255]);
        let out = median_filter(&img, 1);
        assert!(out.pixels().iter().all(|&p| p == GREEN));
    }

    #[test]
    fn adding_brown_inside_hull_never_decreases_fb() {
        let mut img = Image::filled(12, 12, [0, 0, 0]);
        for r in 1..11 {
            for c in 1..11 {
                img.set(r, c, GREEN);
            }
        }
        let mut last = 0.0;
        // recolor interior pixels that are not hull-defining, green count drops
        for k in 0..30 {
            img.set(2 + k / 8, 2 + k % 8, BROWN);
            let fb = leaf_features(&img, &raw()).unwrap().brown;
            assert!(fb >= last);
            last = fb;
        }
    }
}
