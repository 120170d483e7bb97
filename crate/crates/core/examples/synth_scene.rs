//! Synthesize a bundled scene and write it as a dataset directory.
//!
//! `cargo run --example synth_scene -- [scene 1-9] [out dir]`

use std::path::PathBuf;

use ae_sim::prelude::*;
use ae_sim::scene::dataset;

fn main() -> ae_sim::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ae-sim-synth"));

    let script = scene::bundled::scene(n)?.with_size(84, 56).with_timesteps(20);
    println!("{}: {:?}", script.id, script.attributes);
    let seq = scene::synthesize_scene(&script, &ExposureLadder::standard())?;
    let manifest = dataset::save_dataset(&seq, &out)?;
    println!(
        "wrote {} x {} frames of {}x{} to {}",
        manifest.n_timesteps,
        manifest.ladder_seconds.len(),
        manifest.width,
        manifest.height,
        out.display()
    );
    Ok(())
}
