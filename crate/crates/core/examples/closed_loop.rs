//! Run every controller on the flashing-light scene and compare traces.

use ae_sim::prelude::*;

fn main() -> ae_sim::Result<()> {
    let script = scene::bundled::scene(5)?.with_size(84, 56).with_timesteps(60);
    let seq = scene::synthesize_scene(&script, &ExposureLadder::standard())?;
    let traces: Vec<SimulationTrace> = [Algorithm::Global, Algorithm::Saliency, Algorithm::Entropy]
        .into_iter()
        .map(|a| sim::run(&seq, &RunOptions::new(a, AeConfig::default())))
        .collect::<ae_sim::Result<_>>()?;

    print!("  t");
    for tr in &traces {
        print!(" {:>9}", tr.meta.algorithm.name());
    }
    println!();
    for t in (0..seq.n_timesteps()).step_by(3) {
        print!("{t:>3}");
        for tr in &traces {
            print!(" {:>9}", tr.steps[t].smoothed_index);
        }
        println!();
    }

    // the exposure each frame would have had with perfect knowledge
    let optimal = sim::run(
        &seq,
        &RunOptions::new(Algorithm::Global, AeConfig::default()).with_mode(ControlMode::PerFrameOptimal),
    )?;
    let lag: f64 = traces[0]
        .indices()
        .iter()
        .zip(optimal.indices())
        .map(|(a, b)| (*a as f64 - b as f64).abs())
        .sum::<f64>()
        / seq.n_timesteps() as f64;
    println!("global feedback vs per-frame optimal: {lag:.2} levels mean lag");
    Ok(())
}
