//! Render what the camera would have shown, frame by frame, plus the trace.

use ae_sim::prelude::*;
use ae_sim::sim::{export_frames, export_trace, TraceFormat, DEFAULT_FPS};

fn main() -> ae_sim::Result<()> {
    let script = scene::bundled::scene(4)?.with_size(168, 112).with_timesteps(30);
    let seq = scene::synthesize_scene(&script, &ExposureLadder::standard())?;
    let config = AeConfig::default();
    let trace = sim::run(&seq, &RunOptions::new(Algorithm::Saliency, config.clone()))?;

    let out = std::env::temp_dir().join("ae-sim-video");
    let playback = export_frames(&seq, &trace, &config.isp()?, &out, DEFAULT_FPS)?;
    export_trace(&trace, &out.join("trace.csv"), TraceFormat::Csv)?;
    export_trace(&trace, &out.join("trace.json"), TraceFormat::Json)?;
    println!("{} frames, {:.1} s at {} fps in {}", playback.frames.len(), playback.duration_seconds, playback.fps, out.display());
    Ok(())
}
