use crate::core::Image;
use crate::error::{Error, Result};

/// A 4-connected region of pixels sharing one quantized color.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub pixel_coords: Vec<(usize, usize)>,
    pub mean_color: [f64; 3],
}

impl Segment {
    pub fn size(&self) -> usize {
        self.pixel_coords.len()
    }

    /// Largest channel of the mean color, with its channel index (smallest
    /// index on ties).
    pub fn peak_channel(&self) -> (usize, f64) {
        peak(&self.mean_color)
    }
}

/// Splits an image into image regions.
///
/// Implementations must return a partition of the pixel set.
pub trait Segmenter {
    fn segment(&self, img: &Image) -> Vec<Segment>;
}

/// Connected components over color-quantized pixels: two 4-adjacent pixels
/// share a segment iff `channel / step` agrees on all three channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuantizedComponents {
    step: u8,
}

impl QuantizedComponents {
    pub fn new(quantization_step: usize) -> Result<Self> {
        if !(1..=128).contains(&quantization_step) {
            return Err(Error::Input(format!(
                "quantization step {quantization_step} outside [1, 128]"
            )));
        }
        Ok(Self {
            step: quantization_step as u8,
        })
    }
}

/// Size and mean color of one segment, without its pixel list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentStats {
    pub size: usize,
    pub mean_color: [f64; 3],
}

impl SegmentStats {
    /// See [`Segment::peak_channel`].
    pub fn peak_channel(&self) -> (usize, f64) {
        peak(&self.mean_color)
    }
}

fn peak(mean: &[f64; 3]) -> (usize, f64) {
    let mut best = (0, mean[0]);
    for (c, &v) in mean.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (c, v);
        }
    }
    best
}

struct Run {
    start: usize,
    end: usize,
    key: u32,
    sum: [u64; 3],
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let up = parent[parent[x as usize] as usize];
        parent[x as usize] = up;
        x = up;
    }
    x
}

/// Links the later root under the earlier one so roots stay at the first run.
fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

impl QuantizedComponents {
    /// Per-pixel segment ids (in raster order of first pixel) and per-segment
    /// statistics indexed by id.
    ///
    /// Works on horizontal runs of equal quantized color, merging runs that
    /// overlap a run of the same color in the row above.
    pub fn label(&self, img: &Image) -> (Vec<u32>, Vec<SegmentStats>) {
        let (h, w) = (img.height(), img.width());
        let px = img.pixels();
        let quant = |p: &[u8; 3]| {
            let q = p.map(|c| u32::from(c / self.step));
            (q[0] << 16) | (q[1] << 8) | q[2]
        };
        let mut runs: Vec<Run> = Vec::new();
        let mut parent: Vec<u32> = Vec::new();
        let mut prev = 0..0;
        for r in 0..h {
            let row = &px[r * w..(r + 1) * w];
            let first = runs.len();
            let mut c = 0;
            while c < w {
                let key = quant(&row[c]);
                let mut sum = [0u64; 3];
                let start = c;
                while c < w && quant(&row[c]) == key {
                    for ch in 0..3 {
                        sum[ch] += u64::from(row[c][ch]);
                    }
                    c += 1;
                }
                parent.push(runs.len() as u32);
                runs.push(Run { start, end: c, key, sum });
            }
            let cur = first..runs.len();
            let (mut a, mut b) = (prev.start, cur.start);
            while a < prev.end && b < cur.end {
                if runs[a].key == runs[b].key && runs[a].start < runs[b].end && runs[b].start < runs[a].end {
                    union(&mut parent, a as u32, b as u32);
                }
                if runs[a].end <= runs[b].end {
                    a += 1;
                } else {
                    b += 1;
                }
            }
            prev = cur;
        }

        let mut id = vec![u32::MAX; runs.len()];
        let mut sums: Vec<(usize, [u64; 3])> = Vec::new();
        let mut label = Vec::with_capacity(h * w);
        for i in 0..runs.len() {
            let root = find(&mut parent, i as u32) as usize;
            if id[root] == u32::MAX {
                id[root] = sums.len() as u32;
                sums.push((0, [0; 3]));
            }
            let k = id[root];
            let run = &runs[i];
            let acc = &mut sums[k as usize];
            acc.0 += run.end - run.start;
            for ch in 0..3 {
                acc.1[ch] += run.sum[ch];
            }
            label.extend(std::iter::repeat(k).take(run.end - run.start));
        }
        let stats = sums
            .into_iter()
            .map(|(size, sum)| SegmentStats {
                size,
                mean_color: sum.map(|s| s as f64 / size as f64),
            })
            .collect();
        (label, stats)
    }

    /// Segment statistics sorted by descending size; equal sizes keep raster
    /// order of their first pixel.
    pub fn stats(&self, img: &Image) -> Vec<SegmentStats> {
        let mut stats = self.label(img).1;
        stats.sort_by(|a, b| b.size.cmp(&a.size));
        stats
    }
}

impl Segmenter for QuantizedComponents {
    fn segment(&self, img: &Image) -> Vec<Segment> {
        let w = img.width();
        let (label, stats) = self.label(img);
        let mut segments: Vec<Segment> = stats
            .iter()
            .map(|st| Segment {
                pixel_coords: Vec::with_capacity(st.size),
                mean_color: st.mean_color,
            })
            .collect();
        for (i, &id) in label.iter().enumerate() {
            segments[id as usize].pixel_coords.push((i / w, i % w));
        }
        // stable: equal sizes keep raster order of their first pixel
        segments.sort_by(|a, b| b.size().cmp(&a.size()));
        segments
    }
}

/// Segments sorted by descending size.
pub fn segment_image(img: &Image, quantization_step: usize) -> Result<Vec<Segment>> {
    Ok(QuantizedComponents::new(quantization_step)?.segment(img))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::render_color_image;
    use proptest::prelude::*;

    #[test]
    fn uniform_image_is_one_segment() {
        let img = Image::filled(7, 5, [0, 0, 0]);
        let segs = segment_image(&img, 64).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].size(), 35);
    }

    #[test]
    fn patch_image_has_two_segments() {
        let img = render_color_image([0, 255, 0], 20.0, 17.0, 40, 6);
        let segs = segment_image(&img, 64).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].size(), 40 * 40 - 36);
        assert_eq!(segs[1].size(), 36);
        assert_eq!(segs[1].mean_color, [0.0, 255.0, 0.0]);
    }

    #[test]
    fn diagonal_pixels_are_not_connected() {
        let mut img = Image::filled(2, 2, [0, 0, 0]);
        img.set(0, 0, [200, 200, 200]);
        img.set(1, 1, [200, 200, 200]);
        let segs = segment_image(&img, 64).unwrap();
        assert_eq!(segs.len(), 4);
    }

    #[test]
    fn step_out_of_range() {
        let img = Image::filled(1, 1, [0; 3]);
        assert!(segment_image(&img, 0).is_err());
        assert!(segment_image(&img, 129).is_err());
    }

    proptest! {
        #[test]
        fn segments_partition_pixels(
            h in 1usize..9,
            w in 1usize..9,
            raw in prop::collection::vec(any::<u8>(), 81 * 3),
            step in 1usize..=128,
        ) {
            let pixels = (0..h * w).map(|i| [raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]]).collect();
            let img = Image::new(h, w, pixels).unwrap();
            let segs = segment_image(&img, step).unwrap();
            let mut seen = vec![false; h * w];
            for s in &segs {
                prop_assert!(s.size() > 0);
                for &(r, c) in &s.pixel_coords {
                    prop_assert!(r < h && c < w);
                    prop_assert!(!seen[r * w + c]);
                    seen[r * w + c] = true;
                }
            }
            prop_assert!(seen.iter().all(|&b| b));
            prop_assert!(segs.windows(2).all(|p| p[0].size() >= p[1].size()));
            // adjacent pixels with equal quantized colors share a segment
            let mut owner = vec![0; h * w];
            for (k, s) in segs.iter().enumerate() {
                for &(r, c) in &s.pixel_coords {
                    owner[r * w + c] = k;
                }
            }
            let q = |i: usize| img.pixels()[i].map(|c| c as usize / step);
            for r in 0..h {
                for c in 0..w {
                    let i = r * w + c;
                    if c + 1 < w {
                        prop_assert_eq!(q(i) == q(i + 1), owner[i] == owner[i + 1]);
                    }
                    if r + 1 < h {
                        prop_assert_eq!(q(i) == q(i + w), owner[i] == owner[i + w]);
                    }
                }
            }
        }
    }
}
