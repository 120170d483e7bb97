//! Pixel containers for the linear RAW domain and the rendered sRGB domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear RGB image with values in `[0, 1]`, interleaved row-major.
///
/// `bit_depth` records the quantization applied at render time; interpolated
/// or subsampled images are unquantized and carry `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct RawImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    bit_depth: Option<u8>,
}

impl RawImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("dimensions", "image must be non-empty"));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::invalid(
                "pixels",
                format!("expected {} values, got {}", width * height * 3, pixels.len()),
            ));
        }
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::out_of_range("pixels", format!("value {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            pixels,
            bit_depth: None,
        })
    }

    /// Single-value image with all three channels equal.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height * 3])
    }

    /// Build a grey image (R = G = B) from per-pixel luminances.
    pub fn from_gray(width: usize, height: usize, gray: &[f64]) -> Result<Self> {
        let pixels = gray.iter().flat_map(|&v| [v, v, v]).collect();
        Self::new(width, height, pixels)
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        pixels: Vec<f64>,
        bit_depth: Option<u8>,
    ) -> Self {
        debug_assert_eq!(pixels.len(), width * height * 3);
        Self {
            width,
            height,
            pixels,
            bit_depth,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn bit_depth(&self) -> Option<u8> {
        self.bit_depth
    }

    /// Interleaved RGB values.
    pub fn as_slice(&self) -> &[f64] {
        &self.pixels
    }

    pub fn rgb(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Per-pixel luminance, the unweighted mean of the three channels.
    pub fn luminance(&self) -> Vec<f64> {
        self.pixels
            .chunks_exact(3)
            .map(|p| (p[0] + p[1] + p[2]) / 3.0)
            .collect()
    }

    /// Box-average downsampling by `factor`, cropping trailing rows and
    /// columns that do not fill a whole block.
    pub fn subsample(&self, factor: usize) -> Result<RawImage> {
        if factor < 1 {
            return Err(Error::invalid("factor", "subsample factor must be >= 1"));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let (w, h) = (self.width / factor, self.height / factor);
        if w == 0 || h == 0 {
            return Err(Error::invalid(
                "factor",
                format!("factor {factor} exceeds image size {}x{}", self.width, self.height),
            ));
        }
        let norm = (factor * factor) as f64;
        let mut out = vec![0.0; w * h * 3];
        for by in 0..h {
            for bx in 0..w {
                let mut acc = [0.0f64; 3];
                for y in by * factor..(by + 1) * factor {
                    let row = y * self.width;
                    for x in bx * factor..(bx + 1) * factor {
                        let i = (row + x) * 3;
                        acc[0] += self.pixels[i];
                        acc[1] += self.pixels[i + 1];
                        acc[2] += self.pixels[i + 2];
                    }
                }
                let o = (by * w + bx) * 3;
                for c in 0..3 {
                    out[o + c] = (acc[c] / norm).clamp(0.0, 1.0);
                }
            }
        }
        Ok(RawImage::from_parts_unchecked(w, h, out, None))
    }
}

/// 8-bit sRGB image, interleaved row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl SrgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("dimensions", "image must be non-empty"));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::invalid(
                "pixels",
                format!("expected {} values, got {}", width * height * 3, pixels.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.pixels
    }

    /// 8-bit luminance code per pixel: the channel mean rounded to nearest.
    pub fn luminance_codes(&self) -> Vec<u8> {
        self.pixels
            .chunks_exact(3)
            .map(|p| ((p[0] as u16 + p[1] as u16 + p[2] as u16 + 1) / 3) as u8)
            .collect()
    }

    /// Luminance in `[0, 1]`.
    pub fn luminance(&self) -> Vec<f64> {
        self.luminance_codes()
            .into_iter()
            .map(|c| c as f64 / 255.0)
            .collect()
    }
}

/// Axis-aligned pixel rectangle, half-open: `[x, x + width) × [y, y + height)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl BoundingBox {
    pub fn full(width: usize, height: usize) -> Self {
        Self {
            x: 0,
            y: 0,
            width,
            height,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    /// Checks the box is non-empty and lies within a `width × height` image.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.is_empty() {
            return Err(Error::invalid("box", "bounding box is empty"));
        }
        if self.x + self.width > width || self.y + self.height > height {
            return Err(Error::out_of_range(
                "box",
                format!("{self:?} exceeds image bounds {width}x{height}"),
            ));
        }
        Ok(())
    }

    /// Box covering the same region after downsampling by `factor`. Edges
    /// round to the nearest downsampled pixel boundary so the box keeps its
    /// area; the result is clipped to the frame and never empty.
    pub fn scaled_down(&self, factor: usize, width: usize, height: usize) -> BoundingBox {
        let round = |v: usize| (2 * v + factor) / (2 * factor);
        let x0 = round(self.x).min(width.saturating_sub(1));
        let y0 = round(self.y).min(height.saturating_sub(1));
        let x1 = round(self.x + self.width).min(width);
        let y1 = round(self.y + self.height).min(height);
        BoundingBox {
            x: x0,
            y: y0,
            width: x1.saturating_sub(x0).max(1),
            height: y1.saturating_sub(y0).max(1),
        }
    }
}
