//! Scene scripts: a background, moving objects and scheduled lights, all in
//! resolution-independent coordinates, evaluated to a linear radiance field
//! per time step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::BoundingBox;

/// Default sensor quantization.
pub const DEFAULT_BIT_DEPTH: u8 = 14;

/// Normalised position: `[0, 1]` across the frame width and height.
pub type Point = [f64; 2];

/// Linear RGB radiance in 1/s: a pixel exposed for `t` seconds reads `radiance · t`.
pub type Rgb = [f64; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Axis-aligned rectangle of the given normalised width and height.
    Rect { w: f64, h: f64 },
    /// Ellipse with normalised semi-axes.
    Ellipse { rx: f64, ry: f64 },
}

impl Shape {
    /// Signed normalised "inside-ness": `<= 1` inside, growing outward.
    fn radius_at(&self, center: Point, p: Point) -> f64 {
        let du = p[0] - center[0];
        let dv = p[1] - center[1];
        match *self {
            Shape::Rect { w, h } => (du.abs() / (0.5 * w)).max(dv.abs() / (0.5 * h)),
            Shape::Ellipse { rx, ry } => ((du / rx).powi(2) + (dv / ry).powi(2)).sqrt(),
        }
    }

    fn contains(&self, center: Point, p: Point) -> bool {
        self.radius_at(center, p) <= 1.0
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Rect { w, h } => w > 0.0 && h > 0.0,
            Shape::Ellipse { rx, ry } => rx > 0.0 && ry > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("shape", "shape extents must be positive"))
        }
    }
}

/// Where an object or light sits at each time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Path {
    Static { at: Point },
    /// Constant velocity from `from` (first step) to `to` (last step).
    Linear { from: Point, to: Point },
    /// Sinusoidal sweep around `center`.
    Oscillate {
        center: Point,
        amplitude: Point,
        period: f64,
    },
    /// Explicit position for every time step.
    Points { points: Vec<Point> },
}

impl Path {
    pub fn position(&self, t: usize, n_timesteps: usize) -> Point {
        match self {
            Path::Static { at } => *at,
            Path::Linear { from, to } => {
                let s = if n_timesteps > 1 {
                    t as f64 / (n_timesteps - 1) as f64
                } else {
                    0.0
                };
                [from[0] + s * (to[0] - from[0]), from[1] + s * (to[1] - from[1])]
            }
            Path::Oscillate {
                center,
                amplitude,
                period,
            } => {
                let phase = std::f64::consts::TAU * t as f64 / period;
                [center[0] + amplitude[0] * phase.sin(), center[1] + amplitude[1] * phase.sin()]
            }
            Path::Points { points } => points[t],
        }
    }

    fn validate(&self, n_timesteps: usize) -> Result<()> {
        match self {
            Path::Points { points } if points.len() != n_timesteps => Err(Error::invalid(
                "path",
                format!("path has {} positions, expected {n_timesteps}", points.len()),
            )),
            Path::Oscillate { period, .. } if !(*period > 0.0) => {
                Err(Error::invalid("path", "oscillation period must be positive"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub radiance: Rgb,
    /// Fractional radiance change across the frame, left→right and top→bottom.
    #[serde(default)]
    pub gradient: [f64; 2],
    /// Amplitude of multiplicative value-noise texture.
    #[serde(default)]
    pub texture: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MovingObject {
    pub name: String,
    pub shape: Shape,
    pub radiance: Rgb,
    #[serde(default)]
    pub texture: f64,
    pub path: Path,
    /// Lights (by index) whose intensity also scales this object when on,
    /// e.g. a mirror reflecting a spot light.
    #[serde(default)]
    pub lit_by: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightSchedule {
    pub name: String,
    /// Closed time-step ranges `[start, end]` during which the light is on.
    pub on_intervals: Vec<[usize; 2]>,
    /// Radiance multiplier inside the footprint while on.
    pub intensity: f64,
    pub footprint: Shape,
    pub path: Path,
    /// Width of a linear fall-off ring outside the footprint edge, in units
    /// of the footprint radius. Zero gives a hard edge.
    #[serde(default)]
    pub softness: f64,
}

impl LightSchedule {
    pub fn is_on(&self, t: usize) -> bool {
        self.on_intervals.iter().any(|&[a, b]| (a..=b).contains(&t))
    }

    /// Multiplier applied at normalised point `p` at step `t`.
    fn gain_at(&self, t: usize, n_timesteps: usize, p: Point) -> f64 {
        if !self.is_on(t) {
            return 1.0;
        }
        let r = self.footprint.radius_at(self.path.position(t, n_timesteps), p);
        if r <= 1.0 {
            self.intensity
        } else if self.softness > 0.0 && r < 1.0 + self.softness {
            let s = (r - 1.0) / self.softness;
            1.0 + (self.intensity - 1.0) * (1.0 - s)
        } else {
            1.0
        }
    }
}

/// The scene-attribute matrix used to describe each scene.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneAttributes {
    pub backlight: bool,
    pub moving_light: bool,
    pub flashing_light: bool,
    pub reflective: bool,
    pub preferred: bool,
}

/// Optional signal-dependent sensor noise: `σ² = shot · v + read²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub shot: f64,
    pub read: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneScript {
    pub id: String,
    pub n_timesteps: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub background: Background,
    #[serde(default)]
    pub objects: Vec<MovingObject>,
    #[serde(default)]
    pub lights: Vec<LightSchedule>,
    /// Object whose pixel bounding box is the per-step preferred region.
    #[serde(default)]
    pub preferred_object: Option<usize>,
    #[serde(default)]
    pub attributes: SceneAttributes,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u8,
    #[serde(default)]
    pub noise: Option<NoiseProfile>,
}

fn default_bit_depth() -> u8 {
    DEFAULT_BIT_DEPTH
}

/// Linear RGB radiance per pixel, interleaved row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RadianceField {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl RadianceField {
    pub fn rgb(&self, x: usize, y: usize) -> Rgb {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Smooth multiplicative texture in `[-1, 1]`, bilinear over a seeded
/// random lattice.
#[derive(Clone, Debug)]
struct ValueNoise {
    cells: usize,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(seed: u64, stream: u64, cells: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let lattice = (0..(cells + 1) * (cells + 1))
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        Self { cells, lattice }
    }

    fn sample(&self, p: Point) -> f64 {
        let n = self.cells as f64;
        let u = (p[0].rem_euclid(1.0)) * n;
        let v = (p[1].rem_euclid(1.0)) * n;
        let (i, j) = ((u as usize).min(self.cells - 1), (v as usize).min(self.cells - 1));
        let (fu, fv) = (u - i as f64, v - j as f64);
        let at = |a: usize, b: usize| self.lattice[b * (self.cells + 1) + a];
        let top = at(i, j) * (1.0 - fu) + at(i + 1, j) * fu;
        let bottom = at(i, j + 1) * (1.0 - fu) + at(i + 1, j + 1) * fu;
        top * (1.0 - fv) + bottom * fv
    }
}

const TEXTURE_CELLS: usize = 12;

impl SceneScript {
    pub fn validate(&self) -> Result<()> {
        if self.n_timesteps < 1 {
            return Err(Error::invalid("n_timesteps", "need at least one time step"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("dimensions", "width and height must be positive"));
        }
        if !(1..=16).contains(&self.bit_depth) {
            return Err(Error::invalid("bit_depth", "bit depth must be in 1..=16"));
        }
        if self.background.radiance.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::invalid("background", "radiance must be non-negative"));
        }
        for obj in &self.objects {
            obj.shape.validate()?;
            obj.path.validate(self.n_timesteps)?;
            if obj.radiance.iter().any(|r| !(*r >= 0.0)) {
                return Err(Error::invalid("objects", "radiance must be non-negative"));
            }
            if let Some(&bad) = obj.lit_by.iter().find(|&&l| l >= self.lights.len()) {
                return Err(Error::invalid("lit_by", format!("no light with index {bad}")));
            }
        }
        for light in &self.lights {
            light.footprint.validate()?;
            light.path.validate(self.n_timesteps)?;
            if !(light.intensity >= 0.0) {
                return Err(Error::invalid("intensity", "light intensity must be non-negative"));
            }
            for &[a, b] in &light.on_intervals {
                if a > b || b >= self.n_timesteps {
                    return Err(Error::out_of_range(
                        "on_intervals",
                        format!("[{a}, {b}] not within [0, {}]", self.n_timesteps - 1),
                    ));
                }
            }
        }
        if let Some(i) = self.preferred_object {
            if i >= self.objects.len() {
                return Err(Error::invalid("preferred_object", format!("no object {i}")));
            }
        }
        Ok(())
    }

    /// Same scene rendered at a different pixel size.
    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    /// Shorten (or lengthen) the sequence. Light intervals are clipped to
    /// the new range and explicit point paths are truncated.
    pub fn with_timesteps(mut self, n: usize) -> Self {
        self.n_timesteps = n;
        let last = n.saturating_sub(1);
        for light in &mut self.lights {
            light.on_intervals.retain(|&[a, _]| a < n);
            for iv in &mut light.on_intervals {
                iv[1] = iv[1].min(last);
            }
            if let Path::Points { points } = &mut light.path {
                points.truncate(n);
            }
        }
        for obj in &mut self.objects {
            if let Path::Points { points } = &mut obj.path {
                points.truncate(n);
            }
        }
        self
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t >= self.n_timesteps {
            return Err(Error::invalid(
                "t",
                format!("time step {t} outside [0, {})", self.n_timesteps),
            ));
        }
        Ok(())
    }

    fn pixel_center(&self, x: usize, y: usize) -> Point {
        [(x as f64 + 0.5) / self.width as f64, (y as f64 + 0.5) / self.height as f64]
    }

    /// Radiance at step `t`: lit background with objects composited on top
    /// in declaration order.
    pub fn generate_radiance(&self, t: usize) -> Result<RadianceField> {
        self.check_t(t)?;
        let bg_noise = ValueNoise::new(self.seed, 0, TEXTURE_CELLS);
        let obj_noise: Vec<ValueNoise> = (0..self.objects.len())
            .map(|i| ValueNoise::new(self.seed, 1 + i as u64, TEXTURE_CELLS / 2))
            .collect();
        let positions: Vec<Point> = self
            .objects
            .iter()
            .map(|o| o.path.position(t, self.n_timesteps))
            .collect();
        let object_gain: Vec<f64> = self
            .objects
            .iter()
            .map(|o| {
                o.lit_by
                    .iter()
                    .map(|&l| {
                        let light = &self.lights[l];
                        if light.is_on(t) { light.intensity } else { 1.0 }
                    })
                    .product()
            })
            .collect();

        let bg = &self.background;
        let mut data = Vec::with_capacity(self.width * self.height * 3);
        for y in 0..self.height {
            for x in 0..self.width {
                let p = self.pixel_center(x, y);
                let top = self
                    .objects
                    .iter()
                    .enumerate()
                    .rev()
                    .find(|(i, o)| o.shape.contains(positions[*i], p));
                let rgb = match top {
                    Some((i, obj)) => {
                        let local = [p[0] - positions[i][0] + 0.5, p[1] - positions[i][1] + 0.5];
                        let tex = 1.0 + obj.texture * obj_noise[i].sample(local);
                        let g = object_gain[i] * tex;
                        obj.radiance.map(|r| r * g)
                    }
                    None => {
                        let ramp = 1.0 + bg.gradient[0] * (p[0] - 0.5) + bg.gradient[1] * (p[1] - 0.5);
                        let tex = 1.0 + bg.texture * bg_noise.sample(p);
                        let lit: f64 = self
                            .lights
                            .iter()
                            .map(|l| l.gain_at(t, self.n_timesteps, p))
                            .product();
                        let g = (ramp * tex).max(0.0) * lit;
                        bg.radiance.map(|r| r * g)
                    }
                };
                data.extend(rgb.map(|r| r.max(0.0)));
            }
        }
        Ok(RadianceField {
            width: self.width,
            height: self.height,
            data,
        })
    }

    /// Pixel bounding box of object `i` at step `t`, or `None` when it is
    /// entirely outside the frame.
    pub fn object_box(&self, i: usize, t: usize) -> Option<BoundingBox> {
        let obj = self.objects.get(i)?;
        let c = obj.path.position(t, self.n_timesteps);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if obj.shape.contains(c, self.pixel_center(x, y)) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        (x0 != usize::MAX).then(|| BoundingBox {
            x: x0,
            y: y0,
            width: x1 - x0 + 1,
            height: y1 - y0 + 1,
        })
    }

    /// Preferred region for every time step.
    pub fn preferred_boxes(&self) -> Vec<Option<BoundingBox>> {
        (0..self.n_timesteps)
            .map(|t| self.preferred_object.and_then(|i| self.object_box(i, t)))
            .collect()
    }
}
