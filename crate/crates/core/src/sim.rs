//! Closed-loop simulation of an AE controller over a scene, scale
//! comparison, and trace / frame export.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ae::{
    argmax_lowest, metered_histogram, saliency_weight_map, smooth_index, stack_entropies, step,
    AeConfig, AeInput, AeState, Algorithm,
};
use crate::error::{Error, Result};
use crate::exposure::ExposureStack;
use crate::histogram::{entropy, WeightMap};
use crate::image::{BoundingBox, RawImage};
use crate::isp::IspProfile;
use crate::scene::dataset::encode_srgb_png;
use crate::scene::SceneSequence;

/// How each step's exposure is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// Meter the frame at the current exposure and apply the key law.
    #[default]
    Feedback,
    /// Search the whole stack for the level whose weighted mean is closest
    /// to the key.
    PerFrameOptimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub config: AeConfig,
    /// Integer subsampling factor applied to every metered frame.
    #[serde(default = "one")]
    pub scale: usize,
    #[serde(default)]
    pub mode: ControlMode,
}

fn one() -> usize {
    1
}

impl RunOptions {
    pub fn new(algorithm: Algorithm, config: AeConfig) -> Self {
        Self {
            algorithm,
            config,
            scale: 1,
            mode: ControlMode::Feedback,
        }
    }

    pub fn with_scale(mut self, scale: usize) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_mode(mut self, mode: ControlMode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub scene_id: String,
    pub algorithm: Algorithm,
    pub config: AeConfig,
    pub config_hash: String,
    pub scale: usize,
    pub mode: ControlMode,
    /// Set for controllers that see the whole exposure stack.
    pub oracle: bool,
    pub ladder_seconds: Vec<f64>,
    pub dataset_fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    /// Exposure index the controller metered at.
    pub metered_index: usize,
    pub raw_target_index: usize,
    /// Exposure index chosen for this step's output frame.
    pub smoothed_index: usize,
    pub shutter_seconds: f64,
    pub histogram_mean: f64,
    pub scale_applied: f64,
    /// sRGB entropy of the chosen frame, in bits.
    pub entropy: f64,
    pub total_weight: f64,
    pub saturated_pixels: usize,
    pub retained_pixels: usize,
    pub salient_pixels: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub meta: TraceMeta,
    pub steps: Vec<TraceStep>,
}

impl SimulationTrace {
    pub fn indices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.smoothed_index).collect()
    }

    pub fn shutters(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.shutter_seconds).collect()
    }
}

fn metering_frame(scene: &SceneSequence, t: usize, index: usize, scale: usize) -> Result<RawImage> {
    scene.frame(t, index)?.subsample(scale)
}

fn metering_stack(scene: &SceneSequence, t: usize, scale: usize) -> Result<ExposureStack> {
    let stack = scene.stack(t)?;
    if scale == 1 {
        return Ok(stack);
    }
    let images = stack
        .images
        .par_iter()
        .map(|img| img.subsample(scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExposureStack {
        images,
        captured_mask: stack.captured_mask,
    })
}

fn metering_box(scene: &SceneSequence, t: usize, frame: &RawImage, scale: usize) -> Result<BoundingBox> {
    let b = scene.bounding_box(t).ok_or(Error::MissingBox(t))?;
    Ok(if scale == 1 {
        b
    } else {
        b.scaled_down(scale, frame.width(), frame.height())
    })
}

fn validate(scene: &SceneSequence, opts: &RunOptions) -> Result<()> {
    opts.config.validate_for(scene.ladder())?;
    if opts.scale < 1 {
        return Err(Error::out_of_range("scale", "must be >= 1"));
    }
    let (w, h) = scene.dimensions();
    if w / opts.scale == 0 || h / opts.scale == 0 {
        return Err(Error::out_of_range(
            "scale",
            format!("factor {} exceeds frame size {w}x{h}", opts.scale),
        ));
    }
    if opts.algorithm == Algorithm::Semantic {
        if let Some(t) = (0..scene.n_timesteps()).find(|&t| scene.bounding_box(t).is_none()) {
            return Err(Error::MissingBox(t));
        }
    }
    Ok(())
}

/// Simulate `opts.algorithm` over every time step of `scene`.
pub fn run(scene: &SceneSequence, opts: &RunOptions) -> Result<SimulationTrace> {
    validate(scene, opts)?;
    let config = &opts.config;
    let ladder = scene.ladder();
    let isp = config.isp()?;
    let mut state = AeState::new(config, ladder)?;
    let mut steps = Vec::with_capacity(scene.n_timesteps());

    for t in 0..scene.n_timesteps() {
        let metered_index = state.current_index;
        let (decision, stack) = match opts.mode {
            ControlMode::Feedback => feedback_step(scene, t, opts, &mut state, &isp)?,
            ControlMode::PerFrameOptimal => optimal_step(scene, t, opts, &mut state, &isp)?,
        };
        let chosen = decision.smoothed_index;
        let chosen_frame = match &stack {
            Some(s) => s.images[chosen].clone(),
            None => metering_frame(scene, t, chosen, opts.scale)?,
        };
        let srgb = isp.raw_to_srgb(&chosen_frame);
        let frame_entropy = entropy(&srgb);
        if opts.algorithm == Algorithm::Saliency {
            state.remember_frame(srgb);
        }
        steps.push(TraceStep {
            t,
            metered_index,
            raw_target_index: decision.raw_target_index,
            smoothed_index: chosen,
            shutter_seconds: ladder.speed(chosen).seconds(),
            histogram_mean: decision.histogram_mean,
            scale_applied: decision.scale_applied,
            entropy: frame_entropy,
            total_weight: decision.diagnostics.total_weight,
            saturated_pixels: decision.diagnostics.clip.saturated,
            retained_pixels: decision.diagnostics.clip.retained,
            salient_pixels: decision.diagnostics.salient_pixels,
        });
    }

    Ok(SimulationTrace {
        meta: TraceMeta {
            scene_id: scene.id().to_string(),
            algorithm: opts.algorithm,
            config: config.clone(),
            config_hash: config.hash(),
            scale: opts.scale,
            mode: opts.mode,
            oracle: opts.algorithm.is_oracle(),
            ladder_seconds: ladder.speeds().iter().map(|s| s.seconds()).collect(),
            dataset_fingerprint: scene.fingerprint(),
        },
        steps,
    })
}

type StepOutcome = (crate::ae::AeDecision, Option<ExposureStack>);

fn feedback_step(
    scene: &SceneSequence,
    t: usize,
    opts: &RunOptions,
    state: &mut AeState,
    isp: &IspProfile,
) -> Result<StepOutcome> {
    let (config, ladder) = (&opts.config, scene.ladder());
    if opts.algorithm == Algorithm::Entropy {
        let stack = metering_stack(scene, t, opts.scale)?;
        let d = step(opts.algorithm, AeInput::Stack(&stack), state, config, ladder, isp)?;
        return Ok((d, Some(stack)));
    }
    let frame = metering_frame(scene, t, state.current_index, opts.scale)?;
    let input = if opts.algorithm == Algorithm::Semantic {
        AeInput::FrameWithBox(&frame, metering_box(scene, t, &frame, opts.scale)?)
    } else {
        AeInput::Frame(&frame)
    };
    Ok((step(opts.algorithm, input, state, config, ladder, isp)?, None))
}

fn optimal_step(
    scene: &SceneSequence,
    t: usize,
    opts: &RunOptions,
    state: &mut AeState,
    isp: &IspProfile,
) -> Result<StepOutcome> {
    let (config, ladder) = (&opts.config, scene.ladder());
    let stack = metering_stack(scene, t, opts.scale)?;
    if opts.algorithm == Algorithm::Entropy {
        let d = step(opts.algorithm, AeInput::Stack(&stack), state, config, ladder, isp)?;
        return Ok((d, Some(stack)));
    }
    let (w, h) = stack.images[0].dimensions();
    let (wmap, salient) = match opts.algorithm {
        Algorithm::Global => (WeightMap::uniform(w, h, 1.0), None),
        Algorithm::Semantic => {
            let b = metering_box(scene, t, &stack.images[0], opts.scale)?;
            (WeightMap::from_box(w, h, &b)?, None)
        }
        Algorithm::Saliency => {
            let (m, n) = saliency_weight_map(state.previous_frame(), w, h, &config.saliency)?;
            (m, Some(n))
        }
        Algorithm::Entropy => unreachable!("handled above"),
    };
    let metered = stack
        .images
        .par_iter()
        .map(|img| metered_histogram(img, &wmap, config))
        .collect::<Result<Vec<_>>>()?;
    let means = metered
        .iter()
        .map(|m| m.histogram.weighted_mean())
        .collect::<Result<Vec<_>>>()?;
    let closeness: Vec<f64> = means.iter().map(|m| -(m - config.key_raw).abs()).collect();
    let raw = argmax_lowest(&closeness);
    let current = state.current_index;
    let smoothed = smooth_index(raw, state, config.smoothing_window);
    let chosen = &metered[current];
    Ok((
        crate::ae::AeDecision {
            raw_target_index: raw,
            smoothed_index: smoothed,
            histogram_mean: means[current],
            scale_applied: ladder.speed(raw).seconds() / ladder.speed(current).seconds(),
            diagnostics: crate::ae::Diagnostics {
                total_weight: chosen.histogram.total_weight(),
                clip: chosen.clip,
                salient_pixels: salient,
                entropy: None,
            },
        },
        Some(stack),
    ))
}

/// Independent oracle for entropy AE: entropy of every stack level.
pub fn entropy_profile(scene: &SceneSequence, t: usize, scale: usize, isp: &IspProfile) -> Result<Vec<f64>> {
    Ok(stack_entropies(&metering_stack(scene, t, scale)?, isp))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleDifference {
    pub scale: usize,
    /// `|log2(t_scale / t_reference)|` per frame.
    pub per_frame_ev: Vec<f64>,
    pub mean_ev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleComparison {
    pub scene_id: String,
    pub algorithm: Algorithm,
    pub reference_scale: usize,
    pub traces: Vec<SimulationTrace>,
    pub differences: Vec<ScaleDifference>,
}

/// Run at each scale and measure EV differences against the first.
pub fn compare_scales(
    scene: &SceneSequence,
    algorithm: Algorithm,
    config: &AeConfig,
    scales: &[usize],
) -> Result<ScaleComparison> {
    if scales.len() < 2 {
        return Err(Error::invalid("scales", "need a reference scale and at least one more"));
    }
    let traces = scales
        .par_iter()
        .map(|&s| run(scene, &RunOptions::new(algorithm, config.clone()).with_scale(s)))
        .collect::<Result<Vec<_>>>()?;
    let reference = &traces[0];
    let differences = traces[1..]
        .iter()
        .map(|tr| {
            let per_frame_ev: Vec<f64> = tr
                .steps
                .iter()
                .zip(&reference.steps)
                .map(|(a, b)| (a.shutter_seconds / b.shutter_seconds).log2().abs())
                .collect();
            let mean_ev = per_frame_ev.iter().sum::<f64>() / per_frame_ev.len().max(1) as f64;
            ScaleDifference {
                scale: tr.meta.scale,
                per_frame_ev,
                mean_ev,
            }
        })
        .collect();
    Ok(ScaleComparison {
        scene_id: scene.id().to_string(),
        algorithm,
        reference_scale: scales[0],
        traces,
        differences,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    Json,
    Csv,
}

/// CSV column order.
pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "metered_index",
    "raw_target_index",
    "smoothed_index",
    "shutter_seconds",
    "histogram_mean",
    "scale_applied",
    "entropy",
    "total_weight",
    "saturated_pixels",
    "retained_pixels",
    "salient_pixels",
];

pub fn export_trace(trace: &SimulationTrace, path: &Path, format: TraceFormat) -> Result<()> {
    match format {
        TraceFormat::Json => {
            let bytes = serde_json::to_vec_pretty(trace)?;
            fs::write(path, bytes).map_err(|e| Error::io(path, e))
        }
        TraceFormat::Csv => {
            let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record(CSV_COLUMNS)?;
            for s in &trace.steps {
                w.write_record(&[
                    s.t.to_string(),
                    s.metered_index.to_string(),
                    s.raw_target_index.to_string(),
                    s.smoothed_index.to_string(),
                    s.shutter_seconds.to_string(),
                    s.histogram_mean.to_string(),
                    s.scale_applied.to_string(),
                    s.entropy.to_string(),
                    s.total_weight.to_string(),
                    s.saturated_pixels.to_string(),
                    s.retained_pixels.to_string(),
                    s.salient_pixels.map(|n| n.to_string()).unwrap_or_default(),
                ])?;
            }
            w.flush().map_err(|e| Error::io(path, e))
        }
    }
}

pub fn load_trace(path: &Path) -> Result<SimulationTrace> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

pub const DEFAULT_FPS: u32 = 10;

/// Playback description for a rendered frame sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaybackManifest {
    pub scene_id: String,
    pub algorithm: Algorithm,
    pub fps: u32,
    pub duration_seconds: f64,
    pub frames: Vec<String>,
    pub indices: Vec<usize>,
}

pub const PLAYBACK_MANIFEST_NAME: &str = "playback.json";

/// Write the chosen exposure at every step as an 8-bit sRGB PNG plus a
/// playback manifest.
pub fn export_frames(
    scene: &SceneSequence,
    trace: &SimulationTrace,
    isp: &IspProfile,
    out_dir: &Path,
    fps: u32,
) -> Result<PlaybackManifest> {
    if trace.steps.len() != scene.n_timesteps() {
        return Err(Error::invalid(
            "trace",
            format!("trace has {} steps, scene has {}", trace.steps.len(), scene.n_timesteps()),
        ));
    }
    if fps == 0 {
        return Err(Error::out_of_range("fps", "must be positive"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let frames: Vec<String> = (0..trace.steps.len()).map(|t| format!("frame_{t:03}.png")).collect();
    trace
        .steps
        .par_iter()
        .zip(&frames)
        .try_for_each(|(s, name)| {
            let srgb = isp.raw_to_srgb(&scene.frame(s.t, s.smoothed_index)?);
            let path: PathBuf = out_dir.join(name);
            fs::write(&path, encode_srgb_png(&srgb)?).map_err(|e| Error::io(&path, e))
        })?;
    let manifest = PlaybackManifest {
        scene_id: scene.id().to_string(),
        algorithm: trace.meta.algorithm,
        fps,
        duration_seconds: frames.len() as f64 / fps as f64,
        frames,
        indices: trace.indices(),
    };
    let path = out_dir.join(PLAYBACK_MANIFEST_NAME);
    fs::write(&path, serde_json::to_vec_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposure::ExposureLadder;
    use crate::scene::{bundled, synthesize_scene};

    fn small(n: usize, steps: usize) -> SceneSequence {
        let s = bundled::scene(n).unwrap().with_size(42, 28).with_timesteps(steps);
        synthesize_scene(&s, &ExposureLadder::standard()).unwrap()
    }

    #[test]
    fn run_is_deterministic() {
        let scene = small(5, 12);
        for algo in Algorithm::ALL {
            let opts = RunOptions::new(algo, AeConfig { start_index: 30, ..Default::default() });
            let a = run(&scene, &opts).unwrap();
            let b = run(&scene, &opts).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.steps.len(), 12);
            assert_eq!(a.meta.oracle, algo == Algorithm::Entropy);
        }
    }

    #[test]
    fn per_frame_optimal_runs() {
        let scene = small(9, 6);
        for algo in Algorithm::ALL {
            let opts = RunOptions::new(algo, AeConfig { start_index: 39, ..Default::default() })
                .with_mode(ControlMode::PerFrameOptimal);
            let tr = run(&scene, &opts).unwrap();
            assert_eq!(tr.steps.len(), 6);
        }
    }

    #[test]
    fn bad_config_fails_before_stepping() {
        let scene = small(1, 3);
        let opts = RunOptions::new(Algorithm::Global, AeConfig { start_index: 99, ..Default::default() });
        assert!(matches!(run(&scene, &opts), Err(Error::OutOfRange { field: "start_index", .. })));
        let opts = RunOptions::new(Algorithm::Global, AeConfig::default()).with_scale(0);
        assert!(run(&scene, &opts).is_err());
    }

    #[test]
    fn identical_scales_have_zero_difference() {
        let scene = small(3, 5);
        let cmp = compare_scales(&scene, Algorithm::Global, &AeConfig::default(), &[1, 1]).unwrap();
        assert!(cmp.differences[0].per_frame_ev.iter().all(|&d| d == 0.0));
        assert!(compare_scales(&scene, Algorithm::Global, &AeConfig::default(), &[1]).is_err());
    }

    #[test]
    fn trace_exports() {
        let dir = tempfile::tempdir().unwrap();
        let scene = small(6, 7);
        let tr = run(&scene, &RunOptions::new(Algorithm::Saliency, AeConfig::default())).unwrap();
        let json = dir.path().join("t.json");
        export_trace(&tr, &json, TraceFormat::Json).unwrap();
        assert_eq!(load_trace(&json).unwrap(), tr);

        let csv_path = dir.path().join("t.csv");
        export_trace(&tr, &csv_path, TraceFormat::Csv).unwrap();
        let text = fs::read_to_string(&csv_path).unwrap();
        assert_eq!(text.lines().count(), 7 + 1);
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn frame_export_matches_trace() {
        let dir = tempfile::tempdir().unwrap();
        let scene = small(4, 5);
        let isp = IspProfile::default();
        let tr = run(&scene, &RunOptions::new(Algorithm::Global, AeConfig::default())).unwrap();
        let m = export_frames(&scene, &tr, &isp, dir.path(), DEFAULT_FPS).unwrap();
        assert_eq!(m.frames.len(), 5);
        assert_eq!(m.duration_seconds, 0.5);
        let bytes = fs::read(dir.path().join(&m.frames[3])).unwrap();
        let decoded = crate::scene::dataset::decode_srgb_png(&bytes, Path::new("f")).unwrap();
        let expected = isp.raw_to_srgb(&scene.frame(3, tr.steps[3].smoothed_index).unwrap());
        assert_eq!(decoded, expected);

        let mut short = tr.clone();
        short.steps.pop();
        assert!(export_frames(&scene, &short, &isp, dir.path(), 10).is_err());
    }
}
