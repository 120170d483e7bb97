//! Weighted metering histograms: per-pixel weights, saturation clipping,
//! weighted means and sRGB entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BoundingBox, RawImage, SrgbImage};

pub const RAW_BINS: usize = 1024;
pub const SRGB_BINS: usize = 256;

/// Per-pixel, non-negative metering weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMap {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl WeightMap {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != width * height {
            return Err(Error::invalid(
                "weights",
                format!("expected {} weights, got {}", width * height, weights.len()),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::invalid("weights", format!("weight {w} is not finite and >= 0")));
        }
        Ok(Self {
            width,
            height,
            weights,
        })
    }

    pub fn uniform(width: usize, height: usize, weight: f64) -> Self {
        Self {
            width,
            height,
            weights: vec![weight; width * height],
        }
    }

    /// 1 inside the box, 0 outside.
    pub fn from_box(width: usize, height: usize, bbox: &BoundingBox) -> Result<Self> {
        bbox.validate(width, height)?;
        let mut weights = vec![0.0; width * height];
        for y in bbox.y..bbox.y + bbox.height {
            weights[y * width + bbox.x..y * width + bbox.x + bbox.width].fill(1.0);
        }
        Ok(Self {
            width,
            height,
            weights,
        })
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }
}

/// How the saturation threshold is interpreted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Compare luminance against the threshold directly.
    #[default]
    Absolute,
    /// Compare against `threshold × max luminance in the frame`.
    RelativeToMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipConfig {
    pub threshold: f64,
    pub retain_fraction: f64,
    #[serde(default)]
    pub mode: ThresholdMode,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self {
            threshold: 0.9,
            retain_fraction: 0.01,
            mode: ThresholdMode::Absolute,
        }
    }
}

impl ClipConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::out_of_range("clip_threshold", "must be in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.retain_fraction) {
            return Err(Error::out_of_range("retain_fraction", "must be in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipStats {
    /// Weighted pixels above the threshold.
    pub saturated: usize,
    /// Saturated pixels whose weight was kept.
    pub retained: usize,
}

/// Zero the weights of pixels brighter than the threshold, keeping a
/// deterministic subset: every k-th saturated pixel in row-major order
/// (k = floor(1 / retain_fraction)), at most ceil(retain_fraction × count).
///
/// Only pixels that carry weight take part, so the retained subset always
/// contributes when anything saturated was weighted.
pub fn clip_saturated(
    luminance: &[f64],
    wmap: &WeightMap,
    config: &ClipConfig,
) -> Result<(WeightMap, ClipStats)> {
    if luminance.len() != wmap.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: wmap.dimensions(),
            actual: (luminance.len(), 1),
        });
    }
    let threshold = match config.mode {
        ThresholdMode::Absolute => config.threshold,
        ThresholdMode::RelativeToMax => {
            config.threshold * luminance.iter().copied().fold(0.0, f64::max)
        }
    };
    let is_saturated = |i: usize| luminance[i] > threshold && wmap.weights[i] > 0.0;
    let count = (0..luminance.len()).filter(|&i| is_saturated(i)).count();
    let quota = (config.retain_fraction * count as f64).ceil() as usize;
    let stride = if config.retain_fraction > 0.0 {
        (1.0 / config.retain_fraction).floor() as usize
    } else {
        usize::MAX
    };

    let mut weights = wmap.weights.clone();
    let mut seen = 0usize;
    let mut retained = 0usize;
    for (i, w) in weights.iter_mut().enumerate() {
        if !is_saturated(i) {
            continue;
        }
        if seen.is_multiple_of(stride) && retained < quota {
            retained += 1;
        } else {
            *w = 0.0;
        }
        seen += 1;
    }
    Ok((
        WeightMap {
            width: wmap.width,
            height: wmap.height,
            weights,
        },
        ClipStats {
            saturated: count,
            retained,
        },
    ))
}

/// Fixed-width bins over `[0, 1]` holding accumulated weight.
///
/// The weighted sum of exact pixel values is tracked alongside so that a
/// truly black frame can be told apart from one that merely lands in bin 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedHistogram {
    bins: Vec<f64>,
    value_sum: f64,
}

impl WeightedHistogram {
    pub fn empty(n_bins: usize) -> Self {
        Self {
            bins: vec![0.0; n_bins.max(1)],
            value_sum: 0.0,
        }
    }

    pub fn from_values(values: &[f64], weights: &[f64], n_bins: usize) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: (values.len(), 1),
                actual: (weights.len(), 1),
            });
        }
        let mut hist = Self::empty(n_bins);
        for (&v, &w) in values.iter().zip(weights) {
            hist.add(v, w);
        }
        Ok(hist)
    }

    pub fn bin_of(&self, v: f64) -> usize {
        let n = self.bins.len();
        ((v.clamp(0.0, 1.0) * n as f64) as usize).min(n - 1)
    }

    pub fn add(&mut self, v: f64, w: f64) {
        if w == 0.0 {
            return;
        }
        let b = self.bin_of(v);
        self.bins[b] += w;
        self.value_sum += v * w;
    }

    /// Combine two histograms with the same binning.
    pub fn merge(&mut self, other: &WeightedHistogram) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.value_sum += other.value_sum;
    }

    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / self.bins.len() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.bins.len() as f64
    }

    pub fn total_weight(&self) -> f64 {
        self.bins.iter().sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.bins.iter().filter(|&&w| w > 0.0).count()
    }

    /// Weighted mean over bin centres.
    pub fn weighted_mean(&self) -> Result<f64> {
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(Error::EmptyHistogram);
        }
        let acc: f64 = self
            .bins
            .iter()
            .enumerate()
            .map(|(i, w)| self.bin_center(i) * w)
            .sum();
        Ok(acc / total)
    }

    /// Weighted mean of the exact pixel values that went in.
    pub fn exact_mean(&self) -> Result<f64> {
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(Error::EmptyHistogram);
        }
        Ok(self.value_sum / total)
    }
}

/// Bin the luminance of `image` with per-pixel weights from `wmap`.
pub fn build_histogram(
    image: &RawImage,
    wmap: &WeightMap,
    n_bins: usize,
) -> Result<WeightedHistogram> {
    if image.dimensions() != wmap.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: image.dimensions(),
            actual: wmap.dimensions(),
        });
    }
    WeightedHistogram::from_values(&image.luminance(), wmap.as_slice(), n_bins)
}

/// Shannon entropy in bits of the 256-bin luminance histogram.
pub fn entropy(image: &SrgbImage) -> f64 {
    let mut counts = [0u64; 256];
    let codes = image.luminance_codes();
    for c in &codes {
        counts[*c as usize] += 1;
    }
    let n = codes.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}
