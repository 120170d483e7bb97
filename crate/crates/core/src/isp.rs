//! Minimal RAW → sRGB rendering: a single power curve calibrated so the
//! metering key lands on half brightness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{RawImage, SrgbImage};

/// Default RAW key value.
pub const DEFAULT_KEY: f64 = 0.13;

/// Exponent `g` with `key^g = 0.5`.
pub fn calibrate_gamma(key_raw: f64) -> Result<f64> {
    if !(key_raw > 0.0 && key_raw < 1.0) {
        return Err(Error::out_of_range("key", format!("key must be in (0, 1), got {key_raw}")));
    }
    Ok(0.5f64.ln() / key_raw.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IspProfile {
    key_raw: f64,
    gamma_exponent: f64,
}

impl IspProfile {
    pub fn new(key_raw: f64) -> Result<Self> {
        Ok(Self {
            key_raw,
            gamma_exponent: calibrate_gamma(key_raw)?,
        })
    }

    pub fn key_raw(&self) -> f64 {
        self.key_raw
    }

    pub fn gamma_exponent(&self) -> f64 {
        self.gamma_exponent
    }

    /// Continuous tone curve on `[0, 1]`.
    pub fn tone(&self, v: f64) -> f64 {
        v.clamp(0.0, 1.0).powf(self.gamma_exponent)
    }

    /// 8-bit code for a single linear value.
    pub fn encode(&self, v: f64) -> u8 {
        (255.0 * self.tone(v)).round() as u8
    }

    pub fn raw_to_srgb(&self, image: &RawImage) -> SrgbImage {
        let lut = ToneLut::new(self);
        let pixels = image.as_slice().iter().map(|&v| lut.encode(v)).collect();
        SrgbImage::new(image.width(), image.height(), pixels).expect("dimensions carried over")
    }
}

impl Default for IspProfile {
    fn default() -> Self {
        Self::new(DEFAULT_KEY).expect("default key is valid")
    }
}

/// Decision thresholds of the 8-bit encoder: code `c` is emitted for inputs in
/// `[thresholds[c-1], thresholds[c])`. Equivalent to `encode` but avoids a
/// `powf` per channel.
struct ToneLut {
    profile: IspProfile,
    thresholds: [f64; 255],
}

impl ToneLut {
    fn new(profile: &IspProfile) -> Self {
        let inv = 1.0 / profile.gamma_exponent;
        let mut thresholds = [0.0; 255];
        for (c, t) in thresholds.iter_mut().enumerate() {
            *t = ((c as f64 + 0.5) / 255.0).powf(inv);
        }
        Self {
            profile: *profile,
            thresholds,
        }
    }

    fn encode(&self, v: f64) -> u8 {
        let guess = self.thresholds.partition_point(|&t| t <= v);
        // The threshold inversion can disagree with the direct formula by an
        // ulp right at a boundary; the direct formula is authoritative there.
        let near = |i: usize| (self.thresholds[i] - v).abs() < 1e-12;
        if (guess < 255 && near(guess)) || (guess > 0 && near(guess - 1)) {
            return self.profile.encode(v);
        }
        guess as u8
    }
}
