//! Linear sensor model: `v = min(1, radiance · t)`, quantized.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::script::{NoiseProfile, RadianceField};
use crate::exposure::ShutterSpeed;
use crate::image::RawImage;

/// Largest code at a given bit depth.
pub fn max_code(bit_depth: u8) -> u32 {
    (1u32 << bit_depth) - 1
}

/// Round a linear value to the nearest level at `bit_depth`.
pub fn quantize(v: f64, bit_depth: u8) -> f64 {
    let max = max_code(bit_depth) as f64;
    (v.clamp(0.0, 1.0) * max).round() / max
}

pub fn render_exposure(radiance: &RadianceField, shutter: ShutterSpeed, bit_depth: u8) -> RawImage {
    let t = shutter.seconds();
    let pixels = radiance
        .data
        .iter()
        .map(|&r| quantize((r * t).min(1.0), bit_depth))
        .collect();
    RawImage::from_parts_unchecked(radiance.width, radiance.height, pixels, Some(bit_depth))
}

/// Like [`render_exposure`] with additive Gaussian noise whose variance grows
/// with the signal. `stream` selects an independent, reproducible sequence.
pub fn render_exposure_noisy(
    radiance: &RadianceField,
    shutter: ShutterSpeed,
    bit_depth: u8,
    noise: &NoiseProfile,
    seed: u64,
    stream: u64,
) -> RawImage {
    let t = shutter.seconds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let pixels = radiance
        .data
        .iter()
        .map(|&r| {
            let v = (r * t).min(1.0);
            let sigma = (noise.shot * v + noise.read * noise.read).max(0.0).sqrt();
            quantize(v + sigma * unit.sample(&mut rng), bit_depth)
        })
        .collect();
    RawImage::from_parts_unchecked(radiance.width, radiance.height, pixels, Some(bit_depth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(r: f64) -> RadianceField {
        RadianceField { width: 1, height: 1, data: vec![r; 3] }
    }

    fn s(v: f64) -> ShutterSpeed {
        ShutterSpeed::new(v).unwrap()
    }

    #[test]
    fn linear_product() {
        let img = render_exposure(&field(0.04), s(0.5), 14);
        assert!((img.as_slice()[0] - 0.02).abs() <= 0.5 / max_code(14) as f64);
        assert_eq!(img.bit_depth(), Some(14));
    }

    #[test]
    fn saturates() {
        let img = render_exposure(&field(0.1), s(15.0), 14);
        assert_eq!(img.as_slice()[0], 1.0);
    }

    #[test]
    fn doubling_time_doubles_value() {
        let step = 1.0 / max_code(14) as f64;
        for i in 1..2000 {
            let r = i as f64 * 0.000_37;
            let a = render_exposure(&field(r), s(0.25), 14).as_slice()[0];
            let b = render_exposure(&field(r), s(0.5), 14).as_slice()[0];
            if b < 1.0 {
                assert!((b - 2.0 * a).abs() <= step + 1e-12, "r = {r}");
            }
        }
    }

    #[test]
    fn noise_is_reproducible() {
        let f = RadianceField { width: 4, height: 4, data: vec![0.1; 48] };
        let p = NoiseProfile { shot: 1e-4, read: 1e-3 };
        let a = render_exposure_noisy(&f, s(1.0), 14, &p, 9, 3);
        let b = render_exposure_noisy(&f, s(1.0), 14, &p, 9, 3);
        let c = render_exposure_noisy(&f, s(1.0), 14, &p, 9, 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
