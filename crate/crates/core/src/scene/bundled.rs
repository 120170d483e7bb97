//! Nine built-in scene scripts covering every combination in the scene
//! attribute matrix: backlight, moving light, flashing light, reflective
//! objects and preferred objects.
//!
//! | scene | backlight | moving light | flashing | reflective | preferred |
//! |-------|-----------|--------------|----------|------------|-----------|
//! | 1     |           |              |          | x          |           |
//! | 2     |           | x            |          | x          |           |
//! | 3     |           | x            | x        | x          |           |
//! | 4     | x         | x            | x        |            | x         |
//! | 5     |           |              | x        |            | x         |
//! | 6     |           |              | x        | x          | x         |
//! | 7     |           | x            |          | x          | x         |
//! | 8     |           | x            | x        |            | x         |
//! | 9     | x         |              | x        |            | x         |

use super::script::*;
use crate::error::{Error, Result};

pub const SCENE_COUNT: usize = 9;
pub const DEFAULT_WIDTH: usize = 168;
pub const DEFAULT_HEIGHT: usize = 112;
pub const DEFAULT_TIMESTEPS: usize = 100;

/// Time steps during which flashing lights are on.
pub const FLASH_INTERVALS: [[usize; 2]; 2] = [[20, 39], [60, 79]];

fn attrs(backlight: bool, moving: bool, flashing: bool, reflective: bool, preferred: bool) -> SceneAttributes {
    SceneAttributes {
        backlight,
        moving_light: moving,
        flashing_light: flashing,
        reflective,
        preferred,
    }
}

fn base(n: usize, seed: u64, attributes: SceneAttributes, background: Rgb) -> SceneScript {
    SceneScript {
        id: format!("scene{n}"),
        n_timesteps: DEFAULT_TIMESTEPS,
        width: DEFAULT_WIDTH,
        height: DEFAULT_HEIGHT,
        seed,
        background: Background {
            radiance: background,
            gradient: [0.25, -0.2],
            texture: 0.1,
        },
        objects: vec![],
        lights: vec![],
        preferred_object: None,
        attributes,
        bit_depth: DEFAULT_BIT_DEPTH,
        noise: None,
    }
}

fn object(name: &str, shape: Shape, radiance: Rgb, texture: f64, path: Path) -> MovingObject {
    MovingObject {
        name: name.into(),
        shape,
        radiance,
        texture,
        path,
        lit_by: vec![],
    }
}

fn at(x: f64, y: f64) -> Path {
    Path::Static { at: [x, y] }
}

fn face(path: Path) -> MovingObject {
    object("face", Shape::Ellipse { rx: 0.16, ry: 0.26 }, [0.11, 0.085, 0.07], 0.2, path)
}

fn mirror(x: f64, y: f64) -> MovingObject {
    object("mirror", Shape::Rect { w: 0.1, h: 0.16 }, [0.6, 0.6, 0.65], 0.05, at(x, y))
}

fn box_object(x: f64, y: f64) -> MovingObject {
    object("box", Shape::Rect { w: 0.26, h: 0.32 }, [0.04, 0.055, 0.07], 0.2, at(x, y))
}

fn spot(name: &str, intervals: Vec<[usize; 2]>, intensity: f64, footprint: Shape, path: Path) -> LightSchedule {
    LightSchedule {
        name: name.into(),
        on_intervals: intervals,
        intensity,
        footprint,
        path,
        softness: 0.15,
    }
}

fn always() -> Vec<[usize; 2]> {
    vec![[0, DEFAULT_TIMESTEPS - 1]]
}

fn flashing() -> Vec<[usize; 2]> {
    FLASH_INTERVALS.to_vec()
}

fn sweep() -> Path {
    Path::Linear {
        from: [0.1, 0.4],
        to: [0.9, 0.6],
    }
}

fn backlight() -> LightSchedule {
    LightSchedule {
        name: "backlight".into(),
        on_intervals: always(),
        intensity: 6.0,
        footprint: Shape::Rect { w: 0.5, h: 0.7 },
        path: at(0.5, 0.45),
        softness: 0.1,
    }
}

/// Bundled scene `n` (1-based).
pub fn scene(n: usize) -> Result<SceneScript> {
    let s = match n {
        1 => {
            let mut s = base(1, 101, attrs(false, false, false, true, false), [0.09, 0.1, 0.11]);
            s.objects = vec![box_object(0.5, 0.55), mirror(0.78, 0.35)];
            s.preferred_object = Some(0);
            s
        }
        2 => {
            let mut s = base(2, 202, attrs(false, true, false, true, false), [0.06, 0.065, 0.07]);
            s.lights = vec![spot("spot", always(), 4.0, Shape::Ellipse { rx: 0.18, ry: 0.3 }, sweep())];
            let mut m = mirror(0.25, 0.3);
            m.lit_by = vec![0];
            m.radiance = [0.25, 0.25, 0.27];
            s.objects = vec![box_object(0.55, 0.6), m];
            s.preferred_object = Some(0);
            s
        }
        3 => {
            let mut s = base(3, 303, attrs(false, true, true, true, false), [0.07, 0.07, 0.08]);
            s.lights = vec![spot(
                "spot",
                flashing(),
                6.0,
                Shape::Ellipse { rx: 0.25, ry: 0.4 },
                Path::Oscillate { center: [0.5, 0.5], amplitude: [0.3, 0.05], period: 40.0 },
            )];
            let mut m = mirror(0.2, 0.7);
            m.lit_by = vec![0];
            m.radiance = [0.25, 0.25, 0.25];
            s.objects = vec![box_object(0.6, 0.45), m];
            s.preferred_object = Some(0);
            s
        }
        4 => {
            let mut s = base(4, 404, attrs(true, true, true, false, true), [0.05, 0.05, 0.055]);
            s.lights = vec![
                backlight(),
                spot("spot", flashing(), 3.0, Shape::Ellipse { rx: 0.2, ry: 0.3 }, sweep()),
            ];
            s.objects = vec![face(Path::Linear { from: [0.4, 0.5], to: [0.6, 0.5] })];
            s.preferred_object = Some(0);
            s
        }
        5 => {
            let mut s = base(5, 505, attrs(false, false, true, false, true), [0.08, 0.08, 0.085]);
            s.lights = vec![spot("spot", flashing(), 6.0, Shape::Rect { w: 1.2, h: 1.2 }, at(0.5, 0.5))];
            s.objects = vec![face(Path::Oscillate { center: [0.5, 0.52], amplitude: [0.12, 0.0], period: 50.0 })];
            s.preferred_object = Some(0);
            s
        }
        6 => {
            let mut s = base(6, 606, attrs(false, false, true, true, true), [0.07, 0.075, 0.08]);
            s.lights = vec![spot("spot", flashing(), 6.0, Shape::Ellipse { rx: 0.45, ry: 0.6 }, at(0.35, 0.5))];
            let mut m = mirror(0.85, 0.3);
            m.lit_by = vec![0];
            m.radiance = [0.3, 0.3, 0.3];
            s.objects = vec![face(Path::Linear { from: [0.3, 0.5], to: [0.55, 0.55] }), m];
            s.preferred_object = Some(0);
            s
        }
        7 => {
            let mut s = base(7, 707, attrs(false, true, false, true, true), [0.06, 0.06, 0.065]);
            s.lights = vec![spot(
                "spot",
                always(),
                5.0,
                Shape::Ellipse { rx: 0.2, ry: 0.3 },
                Path::Linear { from: [0.9, 0.5], to: [0.1, 0.45] },
            )];
            let mut m = mirror(0.15, 0.25);
            m.lit_by = vec![0];
            m.radiance = [0.25, 0.25, 0.28];
            s.objects = vec![face(at(0.55, 0.55)), m];
            s.preferred_object = Some(0);
            s
        }
        8 => {
            let mut s = base(8, 808, attrs(false, true, true, false, true), [0.065, 0.07, 0.07]);
            s.lights = vec![spot(
                "spot",
                flashing(),
                6.0,
                Shape::Ellipse { rx: 0.3, ry: 0.45 },
                Path::Oscillate { center: [0.5, 0.5], amplitude: [0.3, 0.0], period: 30.0 },
            )];
            s.objects = vec![face(Path::Linear { from: [0.7, 0.5], to: [0.35, 0.5] })];
            s.preferred_object = Some(0);
            s
        }
        9 => {
            let mut s = base(9, 909, attrs(true, false, true, false, true), [0.05, 0.05, 0.05]);
            s.lights = vec![
                backlight(),
                spot("spot", flashing(), 4.0, Shape::Ellipse { rx: 0.18, ry: 0.45 }, at(0.12, 0.5)),
            ];
            s.objects = vec![face(at(0.5, 0.5))];
            s.preferred_object = Some(0);
            s
        }
        _ => {
            return Err(Error::invalid(
                "scene",
                format!("bundled scenes are numbered 1..={SCENE_COUNT}, got {n}"),
            ))
        }
    };
    Ok(s)
}

/// All nine bundled scripts in order.
pub fn all() -> Vec<SceneScript> {
    (1..=SCENE_COUNT).map(|n| scene(n).expect("bundled scene")).collect()
}

/// Look up a bundled script by id (`scene1` … `scene9`).
pub fn by_id(id: &str) -> Option<SceneScript> {
    id.strip_prefix("scene")?.parse().ok().and_then(|n| scene(n).ok())
}
