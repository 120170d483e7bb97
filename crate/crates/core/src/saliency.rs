//! Salient-object detection by minimum barrier distance (MBD) to the image
//! boundary, approximated with alternating raster scans.
//!
//! The barrier cost of a path is `max − min` of the intensities along it.
//! Background regions connected to the border have small barrier distance;
//! objects that stand out from their surroundings have a large one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::WeightMap;
use crate::image::SrgbImage;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaliencyConfig {
    /// Binarisation threshold on the normalised map.
    pub gamma_threshold: f64,
    /// Histogram weight of salient pixels; others get 1.
    pub beta_weight: f64,
    /// Number of raster passes (forward and backward alternate).
    pub n_passes: usize,
}

impl Default for SaliencyConfig {
    fn default() -> Self {
        Self {
            gamma_threshold: 0.1,
            beta_weight: 14.0,
            n_passes: 3,
        }
    }
}

impl SaliencyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma_threshold) {
            return Err(Error::out_of_range("gamma", "must be in [0, 1]"));
        }
        if !(self.beta_weight >= 1.0 && self.beta_weight.is_finite()) {
            return Err(Error::out_of_range("beta", "must be >= 1"));
        }
        if self.n_passes < 1 {
            return Err(Error::out_of_range("n_passes", "must be >= 1"));
        }
        Ok(())
    }
}

/// Per-pixel saliency in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SaliencyMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// 8-bit grayscale rendering.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    /// Binary mask of pixels strictly above `gamma`.
    pub fn threshold(&self, gamma: f64) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.values.iter().map(|&v| v > gamma).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::invalid("mask", "length does not match dimensions"));
        }
        Ok(Self { width, height, bits })
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Weight `beta` on salient pixels and 1 elsewhere.
    pub fn to_weights(&self, beta: f64) -> WeightMap {
        let weights = self.bits.iter().map(|&b| if b { beta } else { 1.0 }).collect();
        WeightMap::new(self.width, self.height, weights).expect("beta validated by caller")
    }
}

/// Unnormalised barrier distance map from the image boundary after
/// `n_passes` raster scans over `lum` (row-major, values in `[0, 1]`).
pub fn raster_mbd(lum: &[f64], width: usize, height: usize, n_passes: usize) -> Vec<f64> {
    assert_eq!(lum.len(), width * height);
    let idx = |x: usize, y: usize| y * width + x;
    let mut dist = vec![f64::INFINITY; lum.len()];
    let mut upper = lum.to_vec();
    let mut lower = lum.to_vec();
    for y in 0..height {
        for x in 0..width {
            if x == 0 || y == 0 || x + 1 == width || y + 1 == height {
                dist[idx(x, y)] = 0.0;
            }
        }
    }

    let mut relax = |p: usize, q: usize, dist: &mut [f64]| {
        let v = lum[p];
        let hi = upper[q].max(v);
        let lo = lower[q].min(v);
        let cost = hi - lo;
        if cost < dist[p] {
            dist[p] = cost;
            upper[p] = hi;
            lower[p] = lo;
        }
    };

    for pass in 0..n_passes {
        if pass % 2 == 0 {
            for y in 1..height.saturating_sub(1) {
                for x in 1..width.saturating_sub(1) {
                    let p = idx(x, y);
                    relax(p, idx(x, y - 1), &mut dist);
                    relax(p, idx(x - 1, y), &mut dist);
                }
            }
        } else {
            for y in (1..height.saturating_sub(1)).rev() {
                for x in (1..width.saturating_sub(1)).rev() {
                    let p = idx(x, y);
                    relax(p, idx(x, y + 1), &mut dist);
                    relax(p, idx(x + 1, y), &mut dist);
                }
            }
        }
    }
    dist
}

/// Min-max normalise to `[0, 1]`; a flat map becomes all zeros.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / range).collect()
}

/// Normalised MBD saliency of the image's luminance.
pub fn mbd_saliency(image: &SrgbImage, config: &SaliencyConfig) -> SaliencyMap {
    let (w, h) = image.dimensions();
    let dist = raster_mbd(&image.luminance(), w, h, config.n_passes.max(1));
    SaliencyMap {
        width: w,
        height: h,
        values: normalize(&dist),
    }
}

/// Saliency → binary mask → histogram weights, in one go.
pub fn saliency_weights(image: &SrgbImage, config: &SaliencyConfig) -> (WeightMap, BinaryMask) {
    let mask = mbd_saliency(image, config).threshold(config.gamma_threshold);
    (mask.to_weights(config.beta_weight), mask)
}
