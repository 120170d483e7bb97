use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ae_sim::prelude::*;
use ae_sim::saliency::mbd_saliency;
use ae_sim::scene::dataset::{decode_srgb_png, encode_gray8_png, load_dataset, save_dataset};
use ae_sim::sim::{compare_scales, export_frames, export_trace, TraceFormat, DEFAULT_FPS};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "ae-sim", version, about = "Deterministic autoexposure simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene script (or a bundled scene) into a dataset directory.
    Synth(SynthArgs),
    /// Run one AE algorithm over a scene and write its trace.
    Run(RunArgs),
    /// Run at several metering scales and report EV differences.
    CompareScales(CompareArgs),
    /// Barrier-distance saliency map of an sRGB PNG.
    Saliency(SaliencyArgs),
    /// Serve a dataset root over HTTP.
    Serve(ServeArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, conflicts_with = "bundled", required_unless_present = "bundled")]
    script: Option<PathBuf>,
    /// Bundled scene number 1-9, or `all`.
    #[arg(long)]
    bundled: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    timesteps: Option<usize>,
    /// Ladder levels between 1/500 s and 15 s.
    #[arg(long, default_value_t = 40)]
    levels: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, default_value = "global")]
    algo: String,
    #[arg(long)]
    key: Option<f64>,
    /// Saliency threshold.
    #[arg(long)]
    gamma: Option<f64>,
    /// Salient-pixel weight.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    smooth_window: Option<usize>,
    #[arg(long)]
    start_index: Option<usize>,
    /// Full AeConfig as JSON; flags above override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset directory, or a bundled scene id such as `scene3`.
    #[arg(long)]
    scene: String,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    scale: usize,
    #[arg(long)]
    per_frame_optimal: bool,
    #[arg(long)]
    out: PathBuf,
    /// Also write the displayed frames as PNGs.
    #[arg(long)]
    frames: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    scene: String,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,8")]
    scales: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SaliencyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Write the thresholded mask instead of the map.
    #[arg(long)]
    binary: Option<f64>,
    #[arg(long, default_value_t = 3)]
    passes: usize,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "AE_SIM_DATA")]
    data: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> ae_sim::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn open_scene(scene: &str) -> ae_sim::Result<SceneSequence> {
    let path = Path::new(scene);
    if path.is_dir() {
        return load_dataset(path);
    }
    match scene::bundled::by_id(scene) {
        Some(script) => scene::synthesize_scene(&script, &ExposureLadder::standard()),
        None => load_dataset(path),
    }
}

impl ConfigArgs {
    fn resolve(&self) -> ae_sim::Result<(Algorithm, AeConfig)> {
        let algo: Algorithm = self.algo.parse()?;
        let mut c = match &self.config {
            Some(p) => serde_json::from_slice(&fs::read(p).map_err(|e| Error::io(p, e))?)?,
            None => AeConfig::default(),
        };
        if let Some(v) = self.key {
            c.key_raw = v;
        }
        if let Some(v) = self.gamma {
            c.saliency.gamma_threshold = v;
        }
        if let Some(v) = self.beta {
            c.saliency.beta_weight = v;
        }
        if let Some(v) = self.smooth_window {
            c.smoothing_window = v;
        }
        if let Some(v) = self.start_index {
            c.start_index = v;
        }
        c.validate()?;
        Ok((algo, c))
    }
}

fn synth(a: SynthArgs) -> ae_sim::Result<()> {
    let scripts = match (&a.script, a.bundled.as_deref()) {
        (Some(p), _) => vec![serde_json::from_slice(&fs::read(p).map_err(|e| Error::io(p, e))?)?],
        (None, Some("all")) => scene::bundled::all(),
        (None, Some(n)) => {
            let n = n.parse().map_err(|_| Error::InvalidArgument {
                field: "bundled",
                message: format!("`{n}` is not 1-9 or `all`"),
            })?;
            vec![scene::bundled::scene(n)?]
        }
        (None, None) => unreachable!("clap requires one of them"),
    };
    let ladder = ExposureLadder::build(ShutterSpeed::new(1.0 / 500.0)?, ShutterSpeed::new(15.0)?, a.levels)?;
    let many = scripts.len() > 1;
    for mut script in scripts {
        if a.width.is_some() || a.height.is_some() {
            let (w, h) = (a.width.unwrap_or(script.width), a.height.unwrap_or(script.height));
            script = script.with_size(w, h);
        }
        if let Some(n) = a.timesteps {
            script = script.with_timesteps(n);
        }
        if let Some(seed) = a.seed {
            script.seed = seed;
        }
        let dir = if many { a.out.join(&script.id) } else { a.out.clone() };
        let seq = scene::synthesize_scene(&script, &ladder)?;
        save_dataset(&seq, &dir)?;
        println!("{}", json!({"scene": script.id, "dir": dir, "fingerprint": seq.fingerprint()}));
    }
    Ok(())
}

fn run(a: RunArgs) -> ae_sim::Result<()> {
    let seq = open_scene(&a.scene)?;
    let (algo, config) = a.config.resolve()?;
    let mode = if a.per_frame_optimal { ControlMode::PerFrameOptimal } else { ControlMode::Feedback };
    let isp = config.isp()?;
    let trace = sim::run(&seq, &RunOptions::new(algo, config).with_scale(a.scale).with_mode(mode))?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    export_trace(&trace, &a.out.join("trace.json"), TraceFormat::Json)?;
    export_trace(&trace, &a.out.join("trace.csv"), TraceFormat::Csv)?;
    if a.frames {
        export_frames(&seq, &trace, &isp, &a.out.join("frames"), DEFAULT_FPS)?;
    }
    println!(
        "{}",
        json!({"scene": trace.meta.scene_id, "algorithm": algo, "steps": trace.steps.len(), "out": a.out})
    );
    Ok(())
}

fn compare(a: CompareArgs) -> ae_sim::Result<()> {
    let seq = open_scene(&a.scene)?;
    let (algo, config) = a.config.resolve()?;
    let cmp = compare_scales(&seq, algo, &config, &a.scales)?;
    let summary: Vec<_> = cmp.differences.iter().map(|d| json!({"scale": d.scale, "mean_ev": d.mean_ev})).collect();
    if let Some(out) = &a.out {
        write(out, serde_json::to_vec_pretty(&cmp)?)?;
    }
    println!("{}", json!({"scene": cmp.scene_id, "algorithm": algo, "reference_scale": cmp.reference_scale, "differences": summary}));
    Ok(())
}

fn saliency(a: SaliencyArgs) -> ae_sim::Result<()> {
    let bytes = fs::read(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let srgb = decode_srgb_png(&bytes, &a.input)?;
    let config = SaliencyConfig { n_passes: a.passes, ..SaliencyConfig::default() };
    config.validate()?;
    let map = mbd_saliency(&srgb, &config);
    let gray = match a.binary {
        Some(g) => {
            SaliencyConfig { gamma_threshold: g, ..config }.validate()?;
            map.threshold(g).as_slice().iter().map(|&b| if b { 255 } else { 0 }).collect()
        }
        None => map.to_gray8(),
    };
    write(&a.out, encode_gray8_png(map.width(), map.height(), gray)?)
}

fn serve(a: ServeArgs) -> ae_sim::Result<()> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io(&a.data, e))?;
    rt.block_on(ae_sim_service::serve(a.data.clone(), a.port)).map_err(|e| Error::io(&a.data, e))
}

fn fail(code: &str, message: String, field: Option<&str>, exit: u8) -> ExitCode {
    eprintln!("{}", json!({"code": code, "message": message, "field": field}));
    ExitCode::from(exit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail("usage", e.to_string().trim().to_string(), None, 2),
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Run(a) => run(a),
        Command::CompareScales(a) => compare(a),
        Command::Saliency(a) => saliency(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.code(), e.to_string(), e.field(), 1),
    }
}
