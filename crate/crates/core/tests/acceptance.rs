//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fail. Tolerances and time budgets are pinned below.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ae_sim::ae::{
    global_ae, meter_weighted, metered_histogram, saliency_ae, semantic_ae, AeConfig, AeState, Algorithm,
};
use ae_sim::histogram::WeightMap;
use ae_sim::exposure::{expand_stack, ExposureLadder, ShutterSpeed};
use ae_sim::image::{BoundingBox, RawImage, SrgbImage};
use ae_sim::isp::IspProfile;
use ae_sim::saliency::{mbd_saliency, raster_mbd, BinaryMask, SaliencyConfig};
use ae_sim::scene::{bundled, dataset, max_code, render_exposure};
use ae_sim::sim::{self, RunOptions, TraceFormat};

use common::*;

// 1: ladder
const LADDER_TOL: f64 = 1e-6;
const LADDER_STATED_SPAN: f64 = 12.8727;
const LADDER_STATED_STEP: f64 = 0.33007;
const LADDER_BUDGET: Duration = Duration::from_secs(1);
// 2: linearity
const LINEARITY_MIN_PIXELS: usize = 1_000_000;
const LINEARITY_BUDGET: Duration = Duration::from_secs(30);
// 3: interpolation
const INTERP_TOL: f64 = 1e-3;
const INTERP_BUDGET: Duration = Duration::from_secs(30);
// 4: isp
const ISP_GAMMA: f64 = 0.33974;
const ISP_GAMMA_TOL: f64 = 1e-4;
// 5: convergence
const CONVERGE_NO_SMOOTH: usize = 8;
const CONVERGE_SMOOTH: usize = 11;
const CONVERGE_STARTS: [usize; 3] = [0, 20, 39];
const CONVERGE_BUDGET: Duration = Duration::from_secs(10);
// 6: entropy oracle
const ENTROPY_BUDGET: Duration = Duration::from_secs(120);
// 7: mbd
const MBD_IMAGES: usize = 50;
const MBD_MAX_SIDE: usize = 64;
const MBD_MEAN_TOL: f64 = 0.05;
const MBD_IOU_MIN: f64 = 0.5;
const MBD_GAMMA: f64 = 0.1;
const MBD_BUDGET: Duration = Duration::from_secs(120);
// 9: scale stability
const SCALE_FACTOR: usize = 8;
const SCALE_EV_TOL: f64 = 0.35;
const SCALE_BUDGET: Duration = Duration::from_secs(300);
// 10: flashing scene
const FLASH_SCENE: usize = 5;
const FLASH_INDEX_TOL: f64 = 1.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within_budget(start: Instant, budget: Duration) -> (bool, String) {
    let e = start.elapsed();
    (e < budget, format!("{:.2}s of {}s", e.as_secs_f64(), budget.as_secs()))
}

fn ladder_math() -> Outcome {
    let start = Instant::now();
    let ladder = ExposureLadder::build(ShutterSpeed::new(1.0 / 500.0).unwrap(), ShutterSpeed::new(15.0).unwrap(), 40)
        .unwrap();
    let (span, step) = (ladder.ev_span(), ladder.ev_step());
    let (fast, time) = within_budget(start, LADDER_BUDGET);
    // The stated figures are log2(7500) and log2(7500)/39 printed to 4 and
    // 5 decimals; compare against the exact values at the pinned tolerance
    // and against the printed ones at their printed precision.
    let exact_span = 7500f64.log2();
    let exact_step = exact_span / 39.0;
    let pass = (span - exact_span).abs() <= LADDER_TOL
        && (step - exact_step).abs() <= LADDER_TOL
        && (span - LADDER_STATED_SPAN).abs() <= 0.5e-4
        && (step - LADDER_STATED_STEP).abs() <= 0.5e-5
        && fast;
    outcome(
        pass,
        format!(
            "span {span:.7} (exact {exact_span:.7}), step {step:.7} (exact {exact_step:.7}), |span-12.8727| = {:.2e}, |step-0.33007| = {:.2e}, {time}",
            (span - LADDER_STATED_SPAN).abs(),
            (step - LADDER_STATED_STEP).abs()
        ),
    )
}

fn radiometric_linearity() -> Outcome {
    let start = Instant::now();
    let bit_depth = 14u8;
    let q = 1.0 / max_code(bit_depth) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(0x11_ae);
    let mut jobs = Vec::new();
    for n in 1..=bundled::SCENE_COUNT {
        for _ in 0..12 {
            let t = rng.random_range(0..bundled::DEFAULT_TIMESTEPS);
            // log-uniform in [1/500, 7.5] so that 2x stays on the ladder range
            let ev = rng.random_range((1.0f64 / 500.0).log2()..7.5f64.log2());
            jobs.push((n, t, 2f64.powf(ev)));
        }
    }
    let results: Vec<(usize, f64)> = jobs
        .par_iter()
        .map(|&(n, t, shutter)| {
            let script = bundled::scene(n).unwrap();
            let field = script.generate_radiance(t).unwrap();
            let a = render_exposure(&field, ShutterSpeed::new(shutter).unwrap(), bit_depth);
            let b = render_exposure(&field, ShutterSpeed::new(2.0 * shutter).unwrap(), bit_depth);
            let mut checked = 0;
            let mut worst = 0.0f64;
            for (pa, pb) in a.as_slice().chunks_exact(3).zip(b.as_slice().chunks_exact(3)) {
                if pb.iter().any(|&v| v >= 1.0) {
                    continue;
                }
                checked += 1;
                for c in 0..3 {
                    worst = worst.max((pb[c] - 2.0 * pa[c]).abs());
                }
            }
            (checked, worst)
        })
        .collect();
    let checked: usize = results.iter().map(|r| r.0).sum();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let (fast, time) = within_budget(start, LINEARITY_BUDGET);
    let pass = checked >= LINEARITY_MIN_PIXELS && worst <= q * (1.0 + 1e-9) && fast;
    outcome(
        pass,
        format!(
            "{checked} unsaturated pixels, max |v(2t) - 2v(t)| = {:.3} quantization steps, {time}",
            worst / q
        ),
    )
}

fn interpolation_fidelity() -> Outcome {
    let start = Instant::now();
    let ladder = ExposureLadder::standard();
    let kept: Vec<usize> = (0..ladder.len()).filter(|i| i % 2 == 0 || *i == ladder.last_index()).collect();
    let jobs: Vec<(usize, usize)> = (1..=bundled::SCENE_COUNT)
        .flat_map(|n| (0..bundled::DEFAULT_TIMESTEPS).step_by(5).map(move |t| (n, t)))
        .collect();
    let results: Vec<(usize, f64)> = jobs
        .par_iter()
        .map(|&(n, t)| {
            let seq = full_bundled_scene(n);
            let stack = seq.stack(t).unwrap();
            let captured: Vec<(ShutterSpeed, RawImage)> =
                kept.iter().map(|&i| (ladder.speed(i), stack.images[i].clone())).collect();
            let rebuilt = expand_stack(&captured, &ladder).unwrap();
            let mut checked = 0;
            let mut worst = 0.0f64;
            for i in (0..ladder.len()).filter(|i| !kept.contains(i)) {
                let upper = stack.images[i + 1].as_slice();
                let truth = stack.images[i].as_slice();
                let got = rebuilt.images[i].as_slice();
                for k in 0..truth.len() {
                    if upper[k] < 1.0 {
                        checked += 1;
                        worst = worst.max((got[k] - truth[k]).abs());
                    }
                }
            }
            (checked, worst)
        })
        .collect();
    let checked: usize = results.iter().map(|r| r.0).sum();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let (fast, time) = within_budget(start, INTERP_BUDGET);
    outcome(
        worst <= INTERP_TOL && checked > 0 && fast,
        format!("{} dropped levels, {checked} unsaturated samples, max error {worst:.2e}, {time}", ladder.len() - kept.len()),
    )
}

fn isp_calibration() -> Outcome {
    let isp = IspProfile::default();
    let code = isp.encode(0.13);
    let g = isp.gamma_exponent();
    let oracle = gamma_by_bisection(0.13);
    let pass = (code as f64 - 128.0).abs() <= 1.0 && (g - ISP_GAMMA).abs() <= ISP_GAMMA_TOL && (g - oracle).abs() < 1e-12;
    outcome(pass, format!("encode(0.13) = {code}/255, gamma {g:.6} (bisection {oracle:.6})"))
}

fn convergence() -> Outcome {
    let start = Instant::now();
    // scene 1 has no lights and no motion
    let scene = bundled_scene(1, bundled::DEFAULT_WIDTH, bundled::DEFAULT_HEIGHT, 30);
    let ev_step = scene.ladder().ev_step();
    let key = AeConfig::default().key_raw;
    let mut lines = Vec::new();
    let mut pass = true;
    for (window, limit) in [(1, CONVERGE_NO_SMOOTH), (4, CONVERGE_SMOOTH)] {
        for s in CONVERGE_STARTS {
            let cfg = AeConfig { smoothing_window: window, start_index: s, ..Default::default() };
            let trace = sim::run(&scene, &RunOptions::new(Algorithm::Global, cfg)).unwrap();
            let ok = |m: f64| m > 0.0 && (m / key).log2().abs() <= ev_step;
            let first = trace.steps.iter().position(|st| ok(st.histogram_mean));
            let settled = first.is_some_and(|k| {
                let idx: Vec<usize> = trace.steps[k..].iter().map(|s| s.metered_index).collect();
                idx.iter().max().unwrap() - idx.iter().min().unwrap() <= 1
            });
            pass &= first.is_some_and(|k| k <= limit) && settled;
            lines.push(format!(
                "w{window}/start {s}: {}",
                first.map_or("never".into(), |k| format!("{k} it")),
            ));
        }
    }
    let (fast, time) = within_budget(start, CONVERGE_BUDGET);
    outcome(pass && fast, format!("{}, {time}", lines.join(", ")))
}

fn entropy_oracle() -> Outcome {
    let start = Instant::now();
    let tone = ReferenceTone::new(gamma_by_bisection(0.13));
    let mut total = 0;
    let mut matched = 0;
    let mut first_miss = None;
    let per_scene: Vec<Vec<(usize, usize)>> = (1..=bundled::SCENE_COUNT)
        .into_par_iter()
        .map(|n| {
            let scene = full_bundled_scene(n);
            let trace = sim::run(&scene, &RunOptions::new(Algorithm::Entropy, AeConfig::default())).unwrap();
            (0..scene.n_timesteps())
                .into_par_iter()
                .map(|t| {
                    let expected = tone.argmax(&scene.stack(t).unwrap().images);
                    (trace.steps[t].raw_target_index, expected)
                })
                .collect()
        })
        .collect();
    for (i, pairs) in per_scene.iter().enumerate() {
        for (t, &(got, expected)) in pairs.iter().enumerate() {
            total += 1;
            if got == expected {
                matched += 1;
            } else if first_miss.is_none() {
                first_miss = Some(format!("scene{} t{t}: {got} vs {expected}", i + 1));
            }
        }
    }
    let (fast, time) = within_budget(start, ENTROPY_BUDGET);
    let mut detail = format!("{matched}/{total} (scene, t) pairs match, {time}");
    if let Some(m) = first_miss {
        detail.push_str(&format!(", first mismatch {m}"));
    }
    outcome(matched == total && fast, detail)
}

fn random_gray(rng: &mut ChaCha8Rng) -> SrgbImage {
    let w = rng.random_range(8..=MBD_MAX_SIDE);
    let h = rng.random_range(8..=MBD_MAX_SIDE);
    let kind = rng.random_range(0..3);
    let bg = rng.random_range(0..=255) as f64;
    let noise = rng.random_range(0.0..40.0);
    let blobs: Vec<(f64, f64, f64, f64, f64)> = (0..rng.random_range(1..5))
        .map(|_| {
            (
                rng.random_range(0.0..w as f64),
                rng.random_range(0.0..h as f64),
                rng.random_range(2.0..w.min(h) as f64 / 2.0),
                rng.random_range(2.0..w.min(h) as f64 / 2.0),
                rng.random_range(0..=255) as f64,
            )
        })
        .collect();
    let mut px = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let v = match kind {
                // uniform noise
                0 => rng.random_range(0..=255) as f64,
                // blobs on a flat background
                1 => {
                    let mut v = bg;
                    for &(cx, cy, rx, ry, c) in &blobs {
                        let (dx, dy) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
                        if dx * dx + dy * dy <= 1.0 {
                            v = c;
                        }
                    }
                    v + rng.random_range(-noise..=noise)
                }
                // gradient
                _ => bg * x as f64 / w as f64 + (255.0 - bg) * y as f64 / h as f64 + rng.random_range(-noise..=noise),
            };
            let c = v.round().clamp(0.0, 255.0) as u8;
            px.extend([c, c, c]);
        }
    }
    SrgbImage::new(w, h, px).unwrap()
}

fn mbd_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x3bd);
    let images: Vec<SrgbImage> = (0..MBD_IMAGES).map(|_| random_gray(&mut rng)).collect();
    let per_image: Vec<(f64, usize)> = images
        .par_iter()
        .map(|img| {
            let lum = img.luminance();
            let (w, h) = img.dimensions();
            let fast = raster_mbd(&lum, w, h, SaliencyConfig::default().n_passes);
            let exact = exact_mbd(&lum, w, h);
            let err: f64 = fast.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum();
            (err, lum.len())
        })
        .collect();
    let total_err: f64 = per_image.iter().map(|p| p.0).sum();
    let total_px: usize = per_image.iter().map(|p| p.1).sum();
    let mean_err = total_err / total_px as f64;
    let worst_image = per_image.iter().map(|p| p.0 / p.1 as f64).fold(0.0, f64::max);

    let (side, lo, hi) = (64usize, 20usize, 44usize);
    let mut px = vec![26u8; side * side * 3];
    let mut truth = vec![false; side * side];
    for y in lo..hi {
        for x in lo..hi {
            truth[y * side + x] = true;
            px[(y * side + x) * 3..][..3].fill(230);
        }
    }
    let square = SrgbImage::new(side, side, px).unwrap();
    let mask = mbd_saliency(&square, &SaliencyConfig::default()).threshold(MBD_GAMMA);
    let overlap = iou(mask.as_slice(), &truth);

    let (fast, time) = within_budget(start, MBD_BUDGET);
    outcome(
        mean_err <= MBD_MEAN_TOL && overlap >= MBD_IOU_MIN && fast,
        format!(
            "{MBD_IMAGES} images, mean |raster - exact| = {mean_err:.4} (worst image {worst_image:.4}), square IoU {overlap:.3}, {time}"
        ),
    )
}

fn reductions() -> Outcome {
    let config = AeConfig::default();
    let isp = IspProfile::default();
    let mut frames = 0usize;
    let mut mismatches = 0usize;
    for n in 1..=bundled::SCENE_COUNT {
        let scene = full_bundled_scene(n);
        let ladder = scene.ladder().clone();
        let (w, h) = scene.dimensions();
        let empty = BinaryMask::empty(w, h).to_weights(config.saliency.beta_weight);
        let bad: usize = (0..scene.n_timesteps())
            .into_par_iter()
            .map(|t| {
                let stack = scene.stack(t).unwrap();
                let mut bad = 0;
                for (i, frame) in stack.images.iter().enumerate() {
                    let cfg = AeConfig { start_index: i, ..config.clone() };
                    let mut state = AeState::new(&cfg, &ladder).unwrap();
                    let g = global_ae(frame, &state, &cfg, &ladder).unwrap();
                    let s = semantic_ae(frame, &BoundingBox::full(w, h), &state, &cfg, &ladder).unwrap();
                    let e = meter_weighted(frame, &empty, i, &cfg, &ladder).unwrap();
                    let mut sal = saliency_ae(frame, &mut state, &cfg, &ladder, &isp).unwrap();
                    sal.diagnostics.salient_pixels = None;
                    let same = |a: &ae_sim::ae::Metering| {
                        a.raw_target_index == g.raw_target_index
                            && a.histogram_mean.to_bits() == g.histogram_mean.to_bits()
                            && a.scale_applied.to_bits() == g.scale_applied.to_bits()
                            && a.diagnostics == g.diagnostics
                    };
                    if !(same(&s) && same(&e) && same(&sal)) {
                        bad += 1;
                    }
                }
                bad
            })
            .sum();
        frames += scene.n_timesteps() * ladder.len();
        mismatches += bad;
    }
    outcome(
        mismatches == 0,
        format!("{frames} frames, {mismatches} differ (full-frame box, empty mask, first step)"),
    )
}

fn scale_stability() -> Outcome {
    let start = Instant::now();
    let jobs: Vec<(usize, Algorithm)> = (1..=bundled::SCENE_COUNT)
        .flat_map(|n| Algorithm::ALL.into_iter().map(move |a| (n, a)))
        .collect();
    let results: Vec<(usize, Algorithm, f64)> = jobs
        .par_iter()
        .map(|&(n, a)| {
            let scene = full_bundled_scene(n);
            let cmp = sim::compare_scales(&scene, a, &AeConfig::default(), &[1, SCALE_FACTOR]).unwrap();
            (n, a, cmp.differences[0].mean_ev)
        })
        .collect();
    let worst = results.iter().max_by(|x, y| x.2.total_cmp(&y.2)).unwrap();
    let overall = results.iter().map(|r| r.2).sum::<f64>() / results.len() as f64;
    let failing: Vec<String> = results
        .iter()
        .filter(|r| r.2 > SCALE_EV_TOL)
        .map(|r| format!("scene{}/{} {:.3}", r.0, r.1, r.2))
        .collect();
    let (fast, time) = within_budget(start, SCALE_BUDGET);
    let mut detail = format!(
        "1/{SCALE_FACTOR} scale, mean {overall:.3} EV, worst scene{}/{} {:.3} EV, {time}",
        worst.0, worst.1, worst.2
    );
    if !failing.is_empty() {
        detail.push_str(&format!(", over budget: {}", failing.join(" ")));
    }
    outcome(failing.is_empty() && fast, detail)
}

fn flashing_scene() -> Outcome {
    let scene = full_bundled_scene(FLASH_SCENE);
    let config = AeConfig::default();
    let key = config.key_raw;
    let run = |a| sim::run(&scene, &RunOptions::new(a, config.clone())).unwrap();
    let (global, saliency) = (run(Algorithm::Global), run(Algorithm::Saliency));
    let lit = |t: usize| bundled::FLASH_INTERVALS.iter().any(|&[a, b]| (a..=b).contains(&t));
    // Metered mean of the object's box in the frame each controller chose:
    // box weights, the usual saturation clipping, histogram mean.
    let object_error = |trace: &sim::SimulationTrace, t: usize| {
        let frame = scene.frame(t, trace.steps[t].smoothed_index).unwrap();
        let b = scene.bounding_box(t).unwrap();
        let wmap = WeightMap::from_box(frame.width(), frame.height(), &b).unwrap();
        let m = metered_histogram(&frame, &wmap, &config).unwrap();
        (m.histogram.weighted_mean().unwrap() - key).abs()
    };
    let on: Vec<usize> = (0..scene.n_timesteps()).filter(|&t| lit(t)).collect();
    let off: Vec<usize> = (0..scene.n_timesteps()).filter(|&t| !lit(t)).collect();
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let g_err = mean(on.iter().map(|&t| object_error(&global, t)).collect());
    let s_err = mean(on.iter().map(|&t| object_error(&saliency, t)).collect());
    let idx_diff = mean(
        off.iter()
            .map(|&t| (global.steps[t].smoothed_index as f64 - saliency.steps[t].smoothed_index as f64).abs())
            .collect(),
    );
    outcome(
        s_err < g_err && idx_diff <= FLASH_INDEX_TOL,
        format!(
            "scene{FLASH_SCENE} light-on object error: saliency {s_err:.4} vs global {g_err:.4}; normal-light mean index difference {idx_diff:.3}"
        ),
    )
}

fn determinism_and_round_trips() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let scene = full_bundled_scene(3);
    for a in Algorithm::ALL {
        let opts = RunOptions::new(a, AeConfig { start_index: 25, ..Default::default() });
        let same = sim::run(&scene, &opts).unwrap() == sim::run(&scene, &opts).unwrap();
        pass &= same;
    }
    notes.push(format!("repeated runs identical: {pass}"));

    let dir = tempfile::tempdir().unwrap();
    let small = bundled_scene(8, 48, 32, 10);
    dataset::save_dataset(&small, dir.path()).unwrap();
    let loaded = dataset::load_dataset(dir.path()).unwrap();
    let dataset_ok = loaded == small;
    pass &= dataset_ok;
    notes.push(format!("dataset: {dataset_ok}"));

    let trace = sim::run(&small, &RunOptions::new(Algorithm::Saliency, AeConfig::default())).unwrap();
    let json = dir.path().join("trace.json");
    sim::export_trace(&trace, &json, TraceFormat::Json).unwrap();
    let json_ok = sim::load_trace(&json).unwrap() == trace;
    let replay_ok = sim::run(&loaded, &RunOptions::new(Algorithm::Saliency, AeConfig::default()))
        .unwrap()
        .steps
        == trace.steps;
    let csv_path = dir.path().join("trace.csv");
    sim::export_trace(&trace, &csv_path, TraceFormat::Csv).unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let csv_ok = rows.len() == trace.steps.len()
        && rows.iter().zip(&trace.steps).all(|(r, s)| {
            r[3].parse::<usize>().unwrap() == s.smoothed_index
                && r[4].parse::<f64>().unwrap().to_bits() == s.shutter_seconds.to_bits()
                && r[5].parse::<f64>().unwrap().to_bits() == s.histogram_mean.to_bits()
                && r[7].parse::<f64>().unwrap().to_bits() == s.entropy.to_bits()
        });
    pass &= json_ok && csv_ok && replay_ok;
    notes.push(format!("trace json: {json_ok}, csv: {csv_ok}, replay from disk: {replay_ok}"));
    outcome(pass, notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("ladder math", ladder_math),
        ("radiometric linearity", radiometric_linearity),
        ("interpolation fidelity", interpolation_fidelity),
        ("isp key calibration", isp_calibration),
        ("convergence", convergence),
        ("entropy oracle equivalence", entropy_oracle),
        ("mbd correctness", mbd_correctness),
        ("reductions", reductions),
        ("scale stability", scale_stability),
        ("flashing-scene behaviour", flashing_scene),
        ("determinism and round-trips", determinism_and_round_trips),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == n.to_string()) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
