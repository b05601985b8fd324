use serde::{Deserialize, Serialize};

use super::segment::QuantizedComponents;
use crate::core::Image;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorClass {
    Red,
    Green,
    Blue,
}

impl ColorClass {
    pub const ALL: [ColorClass; 3] = [ColorClass::Red, ColorClass::Green, ColorClass::Blue];

    pub fn from_channel(c: usize) -> Self {
        Self::ALL[c]
    }

    pub fn channel(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColorParams {
    /// How many of the largest segments are inspected.
    pub top_segments: usize,
    pub quantization_step: usize,
    /// Segments whose brightest mean channel is below this are ignored.
    pub darkness_floor: f64,
}

impl Default for ColorParams {
    fn default() -> Self {
        Self {
            top_segments: 20,
            quantization_step: 64,
            darkness_floor: 32.0,
        }
    }
}

impl ColorParams {
    pub fn validate(&self) -> Result<()> {
        if self.top_segments == 0 {
            return Err(Error::Config("top_segments must be at least 1".into()));
        }
        QuantizedComponents::new(self.quantization_step)?;
        Ok(())
    }
}

/// Dominant patch color: among the `top_segments` largest segments, take the
/// one whose brightest mean channel is highest (earlier segment on ties) and
/// report that channel. `None` when every inspected segment is darker than the
/// floor.
pub fn color_feature(img: &Image, params: &ColorParams) -> Result<Option<ColorClass>> {
    params.validate()?;
    let segmenter = QuantizedComponents::new(params.quantization_step)?;
    Ok(color_from_segments(
        &segmenter.stats(img),
        params.top_segments,
        params.darkness_floor,
    ))
}

/// `segments` must be sorted by descending size.
pub fn color_from_segments(
    segments: &[super::SegmentStats],
    top: usize,
    darkness_floor: f64,
) -> Option<ColorClass> {
    let mut best: Option<(usize, f64)> = None;
    for seg in segments.iter().take(top) {
        let (channel, peak) = seg.peak_channel();
        if peak < darkness_floor {
            continue;
        }
        if best.map_or(true, |(_, p)| peak > p) {
            best = Some((channel, peak));
        }
    }
    best.map(|(c, _)| ColorClass::from_channel(c))
}
