use serde::{Deserialize, Serialize};

use crate::core::Rgb;
use crate::error::{Error, Result};

/// Hexagonal-cone HSV of an 8-bit pixel: hue in degrees `[0, 360)`,
/// saturation and value in `[0, 1]`.
pub fn rgb_to_hsv(pixel: Rgb) -> (f64, f64, f64) {
    let [r, g, b] = pixel.map(|c| f64::from(c) / 255.0);
    rgb01_to_hsv(r, g, b)
}

pub fn rgb01_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let hue = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let hue = if hue >= 360.0 { hue - 360.0 } else { hue };
    let sat = if max == 0.0 { 0.0 } else { delta / max };
    (hue, sat, max)
}

pub fn hsv_to_rgb01(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let c = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    (r + m, g + m, b + m)
}

/// A box in HSV space. Hue ranges with `min > max` wrap through 0°.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsvRange {
    pub hue: (f64, f64),
    pub saturation: (f64, f64),
    pub value: (f64, f64),
}

impl HsvRange {
    pub fn contains(&self, (h, s, v): (f64, f64, f64)) -> bool {
        let (h0, h1) = self.hue;
        let hue_ok = if h0 <= h1 {
            h >= h0 && h <= h1
        } else {
            h >= h0 || h <= h1
        };
        hue_ok
            && s >= self.saturation.0
            && s <= self.saturation.1
            && v >= self.value.0
            && v <= self.value.1
    }

    fn validate(&self, name: &str) -> Result<()> {
        let in_unit = |(a, b): (f64, f64)| (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a <= b;
        let hue_ok = (0.0..=360.0).contains(&self.hue.0) && (0.0..=360.0).contains(&self.hue.1);
        if !(hue_ok && in_unit(self.saturation) && in_unit(self.value)) {
            return Err(Error::Config(format!("malformed HSV range for {name}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LeafPixel {
    Green,
    Brown,
    Discolored,
    Other,
}

/// Color bands for leaf pixels. A pixel is green if it falls in `green`,
/// otherwise brown if in `brown`, otherwise discolored if in `discolored`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsvThresholds {
    pub green: HsvRange,
    pub brown: HsvRange,
    pub discolored: HsvRange,
}

impl Default for HsvThresholds {
    fn default() -> Self {
        Self {
            green: HsvRange {
                hue: (70.0, 160.0),
                saturation: (0.25, 1.0),
                value: (0.15, 1.0),
            },
            brown: HsvRange {
                hue: (10.0, 45.0),
                saturation: (0.25, 1.0),
                value: (0.15, 0.7),
            },
            discolored: HsvRange {
                hue: (0.0, 360.0),
                saturation: (0.0, 1.0),
                value: (0.15, 1.0),
            },
        }
    }
}

impl HsvThresholds {
    pub fn validate(&self) -> Result<()> {
        self.green.validate("green")?;
        self.brown.validate("brown")?;
        self.discolored.validate("discolored")
    }

    pub fn classify(&self, pixel: Rgb) -> LeafPixel {
        let hsv = rgb_to_hsv(pixel);
        if self.green.contains(hsv) {
            LeafPixel::Green
        } else if self.brown.contains(hsv) {
            LeafPixel::Brown
        } else if self.discolored.contains(hsv) {
            LeafPixel::Discolored
        } else {
            LeafPixel::Other
        }
    }
}
