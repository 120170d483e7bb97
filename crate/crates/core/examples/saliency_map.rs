//! Barrier-distance saliency of one rendered frame, written as PNGs.

use std::fs;

use ae_sim::prelude::*;
use ae_sim::saliency::mbd_saliency;
use ae_sim::scene::dataset::{encode_gray8_png, encode_srgb_png};

fn main() -> ae_sim::Result<()> {
    let ladder = ExposureLadder::standard();
    let script = scene::bundled::scene(3)?.with_size(168, 112).with_timesteps(1);
    let seq = scene::synthesize_scene(&script, &ladder)?;
    let config = SaliencyConfig::default();
    let srgb = IspProfile::new(0.13)?.raw_to_srgb(&seq.frame(0, 18)?);
    let map = mbd_saliency(&srgb, &config);
    let mask = map.threshold(config.gamma_threshold);
    println!("{} of {} pixels salient", mask.count(), srgb.width() * srgb.height());

    let out = std::env::temp_dir().join("ae-sim-saliency");
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let (w, h) = srgb.dimensions();
    let files = [
        ("frame.png", encode_srgb_png(&srgb)?),
        ("saliency.png", encode_gray8_png(w, h, map.to_gray8())?),
        ("mask.png", encode_gray8_png(w, h, mask.as_slice().iter().map(|&b| if b { 255 } else { 0 }).collect())?),
    ];
    for (name, bytes) in files {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
