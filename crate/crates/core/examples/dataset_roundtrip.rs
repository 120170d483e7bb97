//! Save a scene to disk, reload it lazily and replay the same run.

use ae_sim::prelude::*;
use ae_sim::scene::dataset::{load_dataset, save_dataset};

fn main() -> ae_sim::Result<()> {
    let script = scene::bundled::scene(8)?.with_size(48, 32).with_timesteps(10);
    let seq = scene::synthesize_scene(&script, &ExposureLadder::standard())?;
    let dir = std::env::temp_dir().join("ae-sim-roundtrip");
    save_dataset(&seq, &dir)?;
    let loaded = load_dataset(&dir)?;
    println!("fingerprint {}", loaded.fingerprint());

    let opts = RunOptions::new(Algorithm::Global, AeConfig::default());
    let a = sim::run(&seq, &opts)?;
    let b = sim::run(&loaded, &opts)?;
    assert_eq!(a.steps, b.steps);
    println!("replayed {} steps identically: {:?}", b.steps.len(), b.indices());
    Ok(())
}
