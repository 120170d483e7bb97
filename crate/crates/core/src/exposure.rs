//! Shutter speeds, EV arithmetic, the discrete exposure ladder, and
//! reconstruction of missing ladder levels from captured neighbours.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::RawImage;

/// Relative tolerance for treating two shutter speeds as the same level.
const SAME_SPEED_REL_TOL: f64 = 1e-9;

/// Exposure time in seconds. Always finite and positive.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ShutterSpeed(f64);

impl ShutterSpeed {
    pub fn new(seconds: f64) -> Result<Self> {
        if !seconds.is_finite() || seconds <= 0.0 {
            return Err(Error::invalid(
                "shutter",
                format!("shutter speed must be positive and finite, got {seconds}"),
            ));
        }
        Ok(Self(seconds))
    }

    pub fn seconds(self) -> f64 {
        self.0
    }

    /// EV difference `log2(self / other)`; positive when `self` is longer.
    pub fn ev_relative(self, other: ShutterSpeed) -> f64 {
        (self.0 / other.0).log2()
    }

    /// Multiply the exposure time by a positive factor.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        Self::new(self.0 * factor)
    }

    fn same_as(self, other: ShutterSpeed) -> bool {
        ((self.0 - other.0) / other.0).abs() <= SAME_SPEED_REL_TOL
    }
}

impl TryFrom<f64> for ShutterSpeed {
    type Error = Error;

    fn try_from(seconds: f64) -> Result<Self> {
        Self::new(seconds)
    }
}

impl From<ShutterSpeed> for f64 {
    fn from(s: ShutterSpeed) -> f64 {
        s.0
    }
}

/// Ascending shutter speeds with constant log2 spacing between the endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ShutterSpeed>", into = "Vec<ShutterSpeed>")]
pub struct ExposureLadder {
    speeds: Vec<ShutterSpeed>,
}

impl ExposureLadder {
    /// `n_levels` speeds evenly spaced in EV from `t_min` to `t_max` inclusive.
    pub fn build(t_min: ShutterSpeed, t_max: ShutterSpeed, n_levels: usize) -> Result<Self> {
        if n_levels < 2 {
            return Err(Error::invalid("n_levels", format!("need at least 2 levels, got {n_levels}")));
        }
        if t_min.0 >= t_max.0 {
            return Err(Error::invalid(
                "t_min",
                format!("t_min ({}) must be shorter than t_max ({})", t_min.0, t_max.0),
            ));
        }
        let step = t_max.ev_relative(t_min) / (n_levels - 1) as f64;
        let mut speeds: Vec<ShutterSpeed> = (0..n_levels)
            .map(|i| ShutterSpeed(t_min.0 * (step * i as f64).exp2()))
            .collect();
        speeds[0] = t_min;
        speeds[n_levels - 1] = t_max;
        Ok(Self { speeds })
    }

    /// The 40-level ladder spanning 1/500 s to 15 s.
    pub fn standard() -> Self {
        Self::build(ShutterSpeed(1.0 / 500.0), ShutterSpeed(15.0), 40).expect("valid constants")
    }

    /// Rebuild from explicit speeds, e.g. read back from a manifest. The
    /// speeds must be strictly increasing with constant EV spacing.
    pub fn from_speeds(speeds: Vec<ShutterSpeed>) -> Result<Self> {
        if speeds.len() < 2 {
            return Err(Error::invalid("ladder", "need at least 2 levels"));
        }
        let step = speeds[1].ev_relative(speeds[0]);
        for pair in speeds.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::invalid("ladder", "speeds must be strictly increasing"));
            }
            if (pair[1].ev_relative(pair[0]) - step).abs() > 1e-6 {
                return Err(Error::invalid("ladder", "speeds must be evenly spaced in EV"));
            }
        }
        Ok(Self { speeds })
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }

    pub fn speeds(&self) -> &[ShutterSpeed] {
        &self.speeds
    }

    pub fn speed(&self, index: usize) -> ShutterSpeed {
        self.speeds[index]
    }

    pub fn t_min(&self) -> ShutterSpeed {
        self.speeds[0]
    }

    pub fn t_max(&self) -> ShutterSpeed {
        self.speeds[self.speeds.len() - 1]
    }

    pub fn last_index(&self) -> usize {
        self.speeds.len() - 1
    }

    /// Total span `log2(t_max / t_min)` in EV.
    pub fn ev_span(&self) -> f64 {
        self.t_max().ev_relative(self.t_min())
    }

    /// EV distance between consecutive levels.
    pub fn ev_step(&self) -> f64 {
        self.ev_span() / (self.speeds.len() - 1) as f64
    }

    /// Ladder index closest in EV to `target`, clamped to the ladder ends.
    /// Exact midpoints resolve to the shorter exposure.
    pub fn nearest_index(&self, target: ShutterSpeed) -> usize {
        if target.0 <= self.t_min().0 {
            return 0;
        }
        if target.0 >= self.t_max().0 {
            return self.last_index();
        }
        let pos = target.ev_relative(self.t_min()) / self.ev_step();
        let lo = (pos.floor() as usize).min(self.last_index());
        let hi = (lo + 1).min(self.last_index());
        let d_lo = self.speeds[lo].ev_relative(target).abs();
        let d_hi = self.speeds[hi].ev_relative(target).abs();
        // `pos` can land one level off through rounding; check the neighbour too.
        let below = lo.saturating_sub(1);
        let d_below = self.speeds[below].ev_relative(target).abs();
        let mut best = (lo, d_lo);
        if d_below < best.1 {
            best = (below, d_below);
        }
        if d_hi < best.1 {
            best = (hi, d_hi);
        }
        best.0
    }

    /// Ladder index of a speed that is (to floating tolerance) a member.
    pub fn index_of(&self, speed: ShutterSpeed) -> Option<usize> {
        let i = self.nearest_index(speed);
        self.speeds[i].same_as(speed).then_some(i)
    }
}

impl TryFrom<Vec<ShutterSpeed>> for ExposureLadder {
    type Error = Error;

    fn try_from(speeds: Vec<ShutterSpeed>) -> Result<Self> {
        Self::from_speeds(speeds)
    }
}

impl From<ExposureLadder> for Vec<ShutterSpeed> {
    fn from(l: ExposureLadder) -> Self {
        l.speeds
    }
}

/// One image per ladder level, with a flag for levels that were captured
/// (as opposed to reconstructed by interpolation).
#[derive(Clone, Debug, PartialEq)]
pub struct ExposureStack {
    pub images: Vec<RawImage>,
    pub captured_mask: Vec<bool>,
}

impl ExposureStack {
    pub fn fully_captured(images: Vec<RawImage>) -> Self {
        let captured_mask = vec![true; images.len()];
        Self {
            images,
            captured_mask,
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn captured_count(&self) -> usize {
        self.captured_mask.iter().filter(|&&c| c).count()
    }
}

/// Reconstruct the image at `target` by per-pixel linear interpolation in
/// exposure time between the two nearest captured neighbours.
///
/// `captured` need not be sorted. A target equal to a captured time returns
/// that image unchanged. No extrapolation beyond the captured range.
pub fn interpolate_exposure(
    captured: &[(ShutterSpeed, &RawImage)],
    target: ShutterSpeed,
) -> Result<RawImage> {
    if captured.len() < 2 {
        return Err(Error::invalid("captured", "need at least two captured exposures"));
    }
    let dims = captured[0].1.dimensions();
    if let Some((_, img)) = captured.iter().find(|(_, img)| img.dimensions() != dims) {
        return Err(Error::DimensionMismatch {
            expected: dims,
            actual: img.dimensions(),
        });
    }
    if let Some((_, img)) = captured.iter().find(|(s, _)| s.same_as(target)) {
        return Ok((*img).clone());
    }

    let below = captured
        .iter()
        .filter(|(s, _)| s.0 < target.0)
        .max_by(|a, b| a.0 .0.total_cmp(&b.0 .0));
    let above = captured
        .iter()
        .filter(|(s, _)| s.0 > target.0)
        .min_by(|a, b| a.0 .0.total_cmp(&b.0 .0));
    let (Some(&(ta, a)), Some(&(tb, b))) = (below, above) else {
        return Err(Error::out_of_range(
            "target",
            format!("{} s is outside the captured range", target.0),
        ));
    };

    let frac = (target.0 - ta.0) / (tb.0 - ta.0);
    let pixels = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&va, &vb)| (va + frac * (vb - va)).clamp(0.0, 1.0))
        .collect();
    Ok(RawImage::from_parts_unchecked(dims.0, dims.1, pixels, None))
}

/// Fill every ladder level from a captured subset. Captured levels are
/// copied verbatim; the rest are interpolated.
pub fn expand_stack(
    captured: &[(ShutterSpeed, RawImage)],
    ladder: &ExposureLadder,
) -> Result<ExposureStack> {
    let mut slots: Vec<Option<&RawImage>> = vec![None; ladder.len()];
    for (speed, img) in captured {
        let idx = ladder.index_of(*speed).ok_or_else(|| {
            Error::invalid("captured", format!("{} s is not a ladder level", speed.0))
        })?;
        slots[idx] = Some(img);
    }
    let sources: Vec<(ShutterSpeed, &RawImage)> =
        captured.iter().map(|(s, img)| (*s, img)).collect();

    let mut images = Vec::with_capacity(ladder.len());
    let mut captured_mask = Vec::with_capacity(ladder.len());
    for (i, slot) in slots.into_iter().enumerate() {
        match slot {
            Some(img) => {
                images.push(img.clone());
                captured_mask.push(true);
            }
            None => {
                images.push(interpolate_exposure(&sources, ladder.speed(i))?);
                captured_mask.push(false);
            }
        }
    }
    Ok(ExposureStack {
        images,
        captured_mask,
    })
}
