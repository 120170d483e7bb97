//! Autoexposure controllers.
//!
//! Global, semantic and saliency AE share one metering law: build a weighted
//! RAW histogram, clip saturated pixels, compare the weighted mean against
//! the key and scale the shutter by `key / mean`. Entropy AE instead picks
//! the stack level whose sRGB rendering has maximum entropy. Every
//! controller's raw target is then smoothed over a short index history.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exposure::{ExposureLadder, ExposureStack};
use crate::histogram::{
    build_histogram, clip_saturated, entropy, ClipConfig, ClipStats, WeightMap, RAW_BINS,
};
use crate::image::{BoundingBox, RawImage, SrgbImage};
use crate::isp::{IspProfile, DEFAULT_KEY};
use crate::saliency::{saliency_weights, SaliencyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Global,
    Semantic,
    Saliency,
    Entropy,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Global,
        Algorithm::Semantic,
        Algorithm::Saliency,
        Algorithm::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Global => "global",
            Algorithm::Semantic => "semantic",
            Algorithm::Saliency => "saliency",
            Algorithm::Entropy => "entropy",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|a| a.name()).collect()
    }

    /// Entropy AE searches the whole exposure stack, which a real camera
    /// could not do.
    pub fn is_oracle(self) -> bool {
        self == Algorithm::Entropy
    }

    /// Config fields each algorithm reads, for clients building forms.
    pub fn config_fields(self) -> &'static [&'static str] {
        const COMMON: &[&str] = &["key_raw", "clip", "smoothing_window", "start_index", "raw_bins"];
        const SALIENCY: &[&str] = &[
            "key_raw",
            "clip",
            "saliency.gamma_threshold",
            "saliency.beta_weight",
            "saliency.n_passes",
            "smoothing_window",
            "start_index",
            "raw_bins",
        ];
        const ENTROPY: &[&str] = &["key_raw", "smoothing_window", "start_index"];
        match self {
            Algorithm::Global | Algorithm::Semantic => COMMON,
            Algorithm::Saliency => SALIENCY,
            Algorithm::Entropy => ENTROPY,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm {
                name: s.to_string(),
                known: Self::names(),
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AeConfig {
    pub key_raw: f64,
    pub clip: ClipConfig,
    pub saliency: SaliencyConfig,
    pub smoothing_window: usize,
    pub start_index: usize,
    pub raw_bins: usize,
}

impl Default for AeConfig {
    fn default() -> Self {
        Self {
            key_raw: DEFAULT_KEY,
            clip: ClipConfig::default(),
            saliency: SaliencyConfig::default(),
            smoothing_window: 4,
            start_index: 0,
            raw_bins: RAW_BINS,
        }
    }
}

impl AeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.key_raw > 0.0 && self.key_raw < 1.0) {
            return Err(Error::out_of_range("key", format!("key must be in (0, 1), got {}", self.key_raw)));
        }
        if self.smoothing_window < 1 {
            return Err(Error::out_of_range("smooth_window", "must be >= 1"));
        }
        if self.raw_bins < 1 {
            return Err(Error::out_of_range("raw_bins", "must be >= 1"));
        }
        self.clip.validate()?;
        self.saliency.validate()
    }

    /// Validate against a particular ladder as well.
    pub fn validate_for(&self, ladder: &ExposureLadder) -> Result<()> {
        self.validate()?;
        if self.start_index >= ladder.len() {
            return Err(Error::out_of_range(
                "start_index",
                format!("{} outside [0, {})", self.start_index, ladder.len()),
            ));
        }
        Ok(())
    }

    /// Short content hash; changes whenever any field changes.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }

    pub fn isp(&self) -> Result<IspProfile> {
        IspProfile::new(self.key_raw)
    }
}

/// Controller memory carried between time steps.
#[derive(Clone, Debug, PartialEq)]
pub struct AeState {
    pub current_index: usize,
    history: VecDeque<usize>,
    prev_srgb: Option<SrgbImage>,
}

impl AeState {
    pub fn new(config: &AeConfig, ladder: &ExposureLadder) -> Result<Self> {
        config.validate_for(ladder)?;
        Ok(Self {
            current_index: config.start_index,
            history: VecDeque::with_capacity(config.smoothing_window),
            prev_srgb: None,
        })
    }

    pub fn history(&self) -> impl Iterator<Item = usize> + '_ {
        self.history.iter().copied()
    }

    pub fn previous_frame(&self) -> Option<&SrgbImage> {
        self.prev_srgb.as_ref()
    }

    /// Record the sRGB image the next saliency step should look at.
    pub fn remember_frame(&mut self, srgb: SrgbImage) {
        self.prev_srgb = Some(srgb);
    }

    pub fn forget_frame(&mut self) {
        self.prev_srgb = None;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub total_weight: f64,
    pub clip: ClipStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub salient_pixels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
}

/// Outcome of one controller's metering, before smoothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metering {
    pub raw_target_index: usize,
    pub histogram_mean: f64,
    pub scale_applied: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AeDecision {
    pub raw_target_index: usize,
    pub smoothed_index: usize,
    pub histogram_mean: f64,
    pub scale_applied: f64,
    pub diagnostics: Diagnostics,
}

/// Shutter multiplier that moves `mean` onto `key`.
pub fn exposure_scale(mean: f64, key: f64) -> Result<f64> {
    if !(mean > 0.0) {
        return Err(Error::DegenerateMetering(mean));
    }
    if !(key > 0.0 && key < 1.0) {
        return Err(Error::out_of_range("key", "must be in (0, 1)"));
    }
    Ok(key / mean)
}

/// A weight map after clipping, with the histogram it produces.
#[derive(Clone, Debug)]
pub struct MeteredHistogram {
    pub weights: WeightMap,
    pub histogram: crate::histogram::WeightedHistogram,
    pub clip: ClipStats,
}

/// Clip `wmap` against `frame` and bin the result.
pub fn metered_histogram(frame: &RawImage, wmap: &WeightMap, config: &AeConfig) -> Result<MeteredHistogram> {
    if frame.dimensions() != wmap.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: frame.dimensions(),
            actual: wmap.dimensions(),
        });
    }
    let (weights, clip) = clip_saturated(&frame.luminance(), wmap, &config.clip)?;
    let histogram = build_histogram(frame, &weights, config.raw_bins)?;
    Ok(MeteredHistogram {
        weights,
        histogram,
        clip,
    })
}

/// The shared histogram-mean law used by global, semantic and saliency AE.
pub fn meter_weighted(
    frame: &RawImage,
    wmap: &WeightMap,
    current_index: usize,
    config: &AeConfig,
    ladder: &ExposureLadder,
) -> Result<Metering> {
    let m = metered_histogram(frame, wmap, config)?;
    let current = ladder.speed(current_index);
    let diagnostics = Diagnostics {
        total_weight: m.histogram.total_weight(),
        clip: m.clip,
        ..Default::default()
    };
    // A frame that is black wherever it is weighted gives no exposure
    // information; open up fully.
    if m.histogram.exact_mean()? <= 0.0 {
        let target = ladder.last_index();
        return Ok(Metering {
            raw_target_index: target,
            histogram_mean: 0.0,
            scale_applied: ladder.speed(target).seconds() / current.seconds(),
            diagnostics,
        });
    }
    let mean = m.histogram.weighted_mean()?;
    let scale = exposure_scale(mean, config.key_raw)?;
    let target = ladder.nearest_index(current.scaled(scale)?);
    Ok(Metering {
        raw_target_index: target,
        histogram_mean: mean,
        scale_applied: scale,
        diagnostics,
    })
}

/// All pixels weighted equally.
pub fn global_ae(
    frame: &RawImage,
    state: &AeState,
    config: &AeConfig,
    ladder: &ExposureLadder,
) -> Result<Metering> {
    let wmap = WeightMap::uniform(frame.width(), frame.height(), 1.0);
    meter_weighted(frame, &wmap, state.current_index, config, ladder)
}

/// Only pixels inside `bbox` contribute.
pub fn semantic_ae(
    frame: &RawImage,
    bbox: &BoundingBox,
    state: &AeState,
    config: &AeConfig,
    ladder: &ExposureLadder,
) -> Result<Metering> {
    let wmap = WeightMap::from_box(frame.width(), frame.height(), bbox)?;
    meter_weighted(frame, &wmap, state.current_index, config, ladder)
}

/// Saliency weights for the current frame, derived from the previous
/// frame's sRGB rendering. No previous frame means no salient pixels.
pub fn saliency_weight_map(
    prev: Option<&SrgbImage>,
    width: usize,
    height: usize,
    config: &SaliencyConfig,
) -> Result<(WeightMap, usize)> {
    match prev {
        None => Ok((WeightMap::uniform(width, height, 1.0), 0)),
        Some(img) => {
            if img.dimensions() != (width, height) {
                return Err(Error::DimensionMismatch {
                    expected: (width, height),
                    actual: img.dimensions(),
                });
            }
            let (w, mask) = saliency_weights(img, config);
            Ok((w, mask.count()))
        }
    }
}

/// Salient pixels of the previous frame weigh `β`, the rest 1. The state
/// is left holding this frame's sRGB rendering for the next step.
pub fn saliency_ae(
    frame: &RawImage,
    state: &mut AeState,
    config: &AeConfig,
    ladder: &ExposureLadder,
    isp: &IspProfile,
) -> Result<Metering> {
    let (wmap, salient) =
        saliency_weight_map(state.prev_srgb.as_ref(), frame.width(), frame.height(), &config.saliency)?;
    let mut metering = meter_weighted(frame, &wmap, state.current_index, config, ladder)?;
    metering.diagnostics.salient_pixels = Some(salient);
    state.prev_srgb = Some(isp.raw_to_srgb(frame));
    Ok(metering)
}

/// Entropy of every stack level's sRGB rendering.
pub fn stack_entropies(stack: &ExposureStack, isp: &IspProfile) -> Vec<f64> {
    use rayon::prelude::*;
    stack
        .images
        .par_iter()
        .map(|img| entropy(&isp.raw_to_srgb(img)))
        .collect()
}

/// First index of the maximum; ties go to the shorter exposure.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// The stack level with maximum sRGB entropy.
pub fn entropy_ae(
    stack: &ExposureStack,
    state: &AeState,
    config: &AeConfig,
    ladder: &ExposureLadder,
    isp: &IspProfile,
) -> Result<Metering> {
    if stack.len() != ladder.len() {
        return Err(Error::invalid("stack", "stack length must equal ladder length"));
    }
    let entropies = stack_entropies(stack, isp);
    let target = argmax_lowest(&entropies);
    // Report the global metering of the frame at the current index so the
    // trace's mean column is comparable across algorithms.
    let frame = &stack.images[state.current_index];
    let global = metered_histogram(frame, &WeightMap::uniform(frame.width(), frame.height(), 1.0), config)?;
    Ok(Metering {
        raw_target_index: target,
        histogram_mean: global.histogram.weighted_mean()?,
        scale_applied: ladder.speed(target).seconds() / ladder.speed(state.current_index).seconds(),
        diagnostics: Diagnostics {
            total_weight: global.histogram.total_weight(),
            clip: global.clip,
            salient_pixels: None,
            entropy: Some(entropies[target]),
        },
    })
}

/// Push `raw_target` into the history window and return the rounded mean.
/// Exact halves round toward the previous smoothed index.
pub fn smooth_index(raw_target: usize, state: &mut AeState, window: usize) -> usize {
    let window = window.max(1);
    state.history.push_back(raw_target);
    while state.history.len() > window {
        state.history.pop_front();
    }
    let sum: usize = state.history.iter().sum();
    let n = state.history.len();
    let floor = sum / n;
    let rem2 = 2 * (sum % n);
    let smoothed = if rem2 < n {
        floor
    } else if rem2 > n {
        floor + 1
    } else if state.current_index <= floor {
        floor
    } else {
        floor + 1
    };
    state.current_index = smoothed;
    smoothed
}

/// Per-step inputs; which variant is needed depends on the algorithm.
#[derive(Clone, Copy, Debug)]
pub enum AeInput<'a> {
    Frame(&'a RawImage),
    FrameWithBox(&'a RawImage, BoundingBox),
    Stack(&'a ExposureStack),
}

/// Run one controller step: meter, then smooth.
pub fn step(
    algorithm: Algorithm,
    input: AeInput<'_>,
    state: &mut AeState,
    config: &AeConfig,
    ladder: &ExposureLadder,
    isp: &IspProfile,
) -> Result<AeDecision> {
    let metering = match (algorithm, input) {
        (Algorithm::Global, AeInput::Frame(f) | AeInput::FrameWithBox(f, _)) => {
            global_ae(f, state, config, ladder)?
        }
        (Algorithm::Semantic, AeInput::FrameWithBox(f, b)) => semantic_ae(f, &b, state, config, ladder)?,
        (Algorithm::Saliency, AeInput::Frame(f) | AeInput::FrameWithBox(f, _)) => {
            saliency_ae(f, state, config, ladder, isp)?
        }
        (Algorithm::Entropy, AeInput::Stack(s)) => entropy_ae(s, state, config, ladder, isp)?,
        (Algorithm::Semantic, _) => return Err(Error::invalid("input", "semantic AE needs a bounding box")),
        (Algorithm::Entropy, _) => return Err(Error::invalid("input", "entropy AE needs the full stack")),
        (_, AeInput::Stack(_)) => return Err(Error::invalid("input", "expected a single frame")),
    };
    let smoothed_index = smooth_index(metering.raw_target_index, state, config.smoothing_window);
    Ok(AeDecision {
        raw_target_index: metering.raw_target_index,
        smoothed_index,
        histogram_mean: metering.histogram_mean,
        scale_applied: metering.scale_applied,
        diagnostics: metering.diagnostics,
    })
}
