//! Datasets written by hand (not by `save_dataset`), the way an external
//! capture rig would produce them.

use std::fs;
use std::path::Path;

use ae_sim::exposure::ExposureLadder;
use ae_sim::scene::dataset::{load_dataset, MANIFEST_NAME};
use ae_sim::Error;
use image::{ImageBuffer, Rgb};
use serde_json::{json, Value};

const BIT_DEPTH: u8 = 12;
const MAX: f64 = 4095.0;

/// 2×1 frame whose two pixels have 12-bit codes `a` and `b` on all channels.
fn write_frame(dir: &Path, name: &str, a: u16, b: u16) {
    let data = vec![a << 4, a << 4, a << 4, b << 4, b << 4, b << 4];
    let buf: ImageBuffer<Rgb<u16>, Vec<u16>> = ImageBuffer::from_raw(2, 1, data).unwrap();
    buf.save(dir.join(name)).unwrap();
}

fn ladder_seconds() -> Vec<f64> {
    ExposureLadder::build(
        ae_sim::exposure::ShutterSpeed::new(1.0).unwrap(),
        ae_sim::exposure::ShutterSpeed::new(16.0).unwrap(),
        5,
    )
    .unwrap()
    .speeds()
    .iter()
    .map(|s| s.seconds())
    .collect()
}

/// Five-level ladder 1, 2, 4, 8, 16 s; levels 0, 2 and 4 captured.
fn manifest() -> Value {
    json!({
        "format_version": 1,
        "scene_id": "rig-capture",
        "n_timesteps": 2,
        "width": 2,
        "height": 1,
        "bit_depth": BIT_DEPTH,
        "ladder_seconds": ladder_seconds(),
        "captured_mask": [true, false, true, false, true],
        "frames": [
            ["a0.png", null, "a2.png", null, "a4.png"],
            ["b0.png", null, "b2.png", null, "b4.png"],
        ],
        "boxes": [{"x": 0, "y": 0, "width": 1, "height": 1}, null],
    })
}

fn write_dataset(dir: &Path, manifest: &Value) {
    // pixel 0 is linear in time; pixel 1 saturates between 4 s and 16 s
    write_frame(dir, "a0.png", 100, 500);
    write_frame(dir, "a2.png", 400, 2000);
    write_frame(dir, "a4.png", 1600, 4095);
    write_frame(dir, "b0.png", 10, 0);
    write_frame(dir, "b2.png", 40, 0);
    write_frame(dir, "b4.png", 160, 0);
    fs::write(dir.join(MANIFEST_NAME), serde_json::to_vec_pretty(manifest).unwrap()).unwrap();
}

#[test]
fn captured_levels_decode_exactly_and_gaps_interpolate_in_time() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &manifest());
    let seq = load_dataset(dir.path()).unwrap();
    assert_eq!(seq.id(), "rig-capture");
    assert_eq!(seq.dimensions(), (2, 1));
    assert_eq!(seq.captured_mask(0).unwrap(), vec![true, false, true, false, true]);

    let f0 = seq.frame(0, 0).unwrap();
    assert_eq!(f0.rgb(0, 0), [100.0 / MAX; 3]);
    assert_eq!(f0.rgb(1, 0), [500.0 / MAX; 3]);

    // 2 s sits halfway (in time) between 1 s and 4 s captures: 1/3 of the way
    let f1 = seq.frame(0, 1).unwrap();
    let expect = |lo: f64, hi: f64, w: f64| (lo + w * (hi - lo)) / MAX;
    assert!((f1.rgb(0, 0)[0] - expect(100.0, 400.0, 1.0 / 3.0)).abs() < 1e-12);
    assert!((f1.rgb(0, 0)[0] - 200.0 / MAX).abs() < 1e-12);
    // 8 s between 4 s and 16 s: weight 1/3 again; saturation is not undone
    let f3 = seq.frame(0, 3).unwrap();
    assert!((f3.rgb(1, 0)[0] - expect(2000.0, 4095.0, 1.0 / 3.0)).abs() < 1e-12);

    let black = seq.frame(1, 3).unwrap();
    assert_eq!(black.rgb(1, 0), [0.0; 3]);
    assert_eq!(seq.bounding_box(0).unwrap().area(), 1);
    assert!(seq.bounding_box(1).is_none());
}

#[test]
fn missing_file_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &manifest());
    fs::remove_file(dir.path().join("b2.png")).unwrap();
    match load_dataset(dir.path()) {
        Err(Error::Io { path, .. }) => assert!(path.ends_with("b2.png"), "{path:?}"),
        other => panic!("expected an io error, got {other:?}"),
    }
}

#[test]
fn inconsistent_manifests_are_rejected() {
    let cases: Vec<(&str, Box<dyn Fn(&mut Value)>)> = vec![
        ("version", Box::new(|m| m["format_version"] = json!(7))),
        ("uncaptured end", Box::new(|m| {
            m["captured_mask"] = json!([true, false, true, false, false]);
            m["frames"][0][4] = Value::Null;
            m["frames"][1][4] = Value::Null;
        })),
        ("mask vs frames", Box::new(|m| m["frames"][1][1] = json!("a0.png"))),
        ("uneven ladder", Box::new(|m| m["ladder_seconds"][1] = json!(2.5))),
        ("box outside", Box::new(|m| m["boxes"][0] = json!({"x": 1, "y": 0, "width": 2, "height": 1}))),
        ("timestep count", Box::new(|m| m["n_timesteps"] = json!(3))),
    ];
    for (what, mutate) in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut m = manifest();
        mutate(&mut m);
        write_dataset(dir.path(), &m);
        assert!(load_dataset(dir.path()).is_err(), "{what} accepted");
    }
}

#[test]
fn wrong_frame_dimensions_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &manifest());
    let buf: ImageBuffer<Rgb<u16>, Vec<u16>> = ImageBuffer::from_raw(1, 1, vec![0; 3]).unwrap();
    buf.save(dir.path().join("a2.png")).unwrap();
    assert!(matches!(load_dataset(dir.path()), Err(Error::DimensionMismatch { .. })));
}
