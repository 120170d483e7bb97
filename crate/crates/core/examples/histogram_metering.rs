//! Meter one frame three ways and show how clipping changes the mean.

use ae_sim::ae::{meter_weighted, metered_histogram};
use ae_sim::prelude::*;

fn main() -> ae_sim::Result<()> {
    let ladder = ExposureLadder::standard();
    let script = scene::bundled::scene(1)?.with_size(84, 56).with_timesteps(1);
    let seq = scene::synthesize_scene(&script, &ladder)?;
    let config = AeConfig::default();
    let (w, h) = seq.dimensions();
    let bbox = seq.bounding_box(0).expect("scene 1 has a face box");

    for index in [10, 20, 30] {
        let frame = seq.frame(0, index)?;
        let maps = [
            ("global", WeightMap::uniform(w, h, 1.0)),
            ("box", WeightMap::from_box(w, h, &bbox)?),
        ];
        for (name, map) in maps {
            let m = metered_histogram(&frame, &map, &config)?;
            let decision = meter_weighted(&frame, &map, index, &config, &ladder)?;
            println!(
                "level {index:>2} {name:<6} mean {:.4} saturated {:>4} retained {:>3} -> level {}",
                decision.histogram_mean, m.clip.saturated, m.clip.retained, decision.raw_target_index
            );
        }
    }
    Ok(())
}
