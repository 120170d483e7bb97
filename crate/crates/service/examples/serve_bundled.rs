//! Synthesize a few small bundled scenes into a temporary root and serve them.
//!
//! `cargo run -p ae-sim-service --example serve_bundled -- [port]`
//! then e.g. `curl localhost:8080/scenes`.

use ae_sim::exposure::ExposureLadder;
use ae_sim::scene::{bundled, dataset, synthesize_scene};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port = std::env::args().nth(1).and_then(|p| p.parse().ok()).unwrap_or(8080);
    let root = std::env::temp_dir().join("ae-sim-serve");
    for n in [1, 5, 9] {
        let script = bundled::scene(n)?.with_size(84, 56).with_timesteps(40);
        let seq = synthesize_scene(&script, &ExposureLadder::standard())?;
        dataset::save_dataset(&seq, &root.join(&script.id))?;
    }
    println!("serving {} on port {port}", root.display());
    ae_sim_service::serve(root, port).await?;
    Ok(())
}
