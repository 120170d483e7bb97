//! How much does metering on a downscaled frame change the exposure?

use ae_sim::prelude::*;
use ae_sim::sim::compare_scales;

fn main() -> ae_sim::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let script = scene::bundled::scene(n)?.with_size(168, 112).with_timesteps(40);
    let seq = scene::synthesize_scene(&script, &ExposureLadder::standard())?;
    for algo in [Algorithm::Global, Algorithm::Semantic, Algorithm::Saliency, Algorithm::Entropy] {
        if algo == Algorithm::Semantic && seq.bounding_box(0).is_none() {
            continue;
        }
        let cmp = compare_scales(&seq, algo, &AeConfig::default(), &[1, 2, 4, 8])?;
        print!("{:<9}", algo.name());
        for d in &cmp.differences {
            let worst = d.per_frame_ev.iter().cloned().fold(0.0, f64::max);
            print!("  x{}: mean {:.3} EV, worst {:.3}", d.scale, d.mean_ev, worst);
        }
        println!();
    }
    Ok(())
}
