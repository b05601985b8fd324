use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// Dense row-major RGB image with 8-bit channels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Image {
    height: usize,
    width: usize,
    pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(height: usize, width: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if pixels.len() != height * width {
            return Err(Error::Input(format!(
                "pixel buffer has {} entries, expected {}x{}",
                pixels.len(),
                height,
                width
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn filled(height: usize, width: usize, color: Rgb) -> Self {
        Self {
            height,
            width,
            pixels: vec![color; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Rgb {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, color: Rgb) {
        self.pixels[row * self.width + col] = color;
    }

    /// Encodes as binary PPM (P6, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + 3 * self.pixels.len());
        out.extend_from_slice(header.as_bytes());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    /// Decodes a binary PPM (P6) with maxval 255. Header comments are skipped.
    pub fn from_ppm(bytes: &[u8]) -> std::result::Result<Self, String> {
        let mut reader = BufReader::new(bytes);
        let mut magic = [0u8; 2];
        reader
            .read_exact(&mut magic)
            .map_err(|_| "truncated header".to_string())?;
        if &magic != b"P6" {
            return Err("not a binary PPM (expected P6)".into());
        }
        let width = read_header_number(&mut reader)?;
        let height = read_header_number(&mut reader)?;
        let maxval = read_header_number(&mut reader)?;
        if maxval != 255 {
            return Err(format!("unsupported maxval {maxval}"));
        }
        // exactly one whitespace byte separates the header from the raster
        let mut sep = [0u8; 1];
        reader
            .read_exact(&mut sep)
            .map_err(|_| "truncated header".to_string())?;
        if !sep[0].is_ascii_whitespace() {
            return Err("missing whitespace after maxval".into());
        }
        let mut raster = vec![0u8; width * height * 3];
        reader
            .read_exact(&mut raster)
            .map_err(|_| format!("raster shorter than {width}x{height}x3 bytes"))?;
        let pixels = raster.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn read_ppm(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_ppm(&bytes).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_ppm()).map_err(|e| Error::io(path, e))
    }
}

fn read_header_number<R: BufRead>(reader: &mut R) -> std::result::Result<usize, String> {
    let mut digits = String::new();
    loop {
        let buf = reader.fill_buf().map_err(|e| e.to_string())?;
        let Some(&b) = buf.first() else {
            return Err("truncated header".into());
        };
        if b == b'#' && digits.is_empty() {
            let mut comment = Vec::new();
            reader
                .read_until(b'\n', &mut comment)
                .map_err(|e| e.to_string())?;
        } else if b.is_ascii_whitespace() {
            if !digits.is_empty() {
                break;
            }
            reader.consume(1);
        } else if b.is_ascii_digit() {
            digits.push(b as char);
            reader.consume(1);
        } else {
            return Err(format!("unexpected byte {b:#04x} in header"));
        }
    }
    digits.parse().map_err(|_| format!("bad number {digits:?}"))
}
