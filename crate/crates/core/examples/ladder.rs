//! Print the shutter ladder and snap a few arbitrary shutter times to it.

use ae_sim::prelude::*;

fn main() -> ae_sim::Result<()> {
    let ladder = ExposureLadder::standard();
    println!("{} levels, {:.4} EV span, {:.5} EV step", ladder.len(), ladder.ev_span(), ladder.ev_step());
    for (i, s) in ladder.speeds().iter().enumerate() {
        println!("{i:>2}  {:>12.6} s", s.seconds());
    }
    for t in [1.0 / 1000.0, 1.0 / 60.0, 0.5, 30.0] {
        let i = ladder.nearest_index(ShutterSpeed::new(t)?);
        println!("{t:>10.5} s -> level {i} ({:.6} s)", ladder.speed(i).seconds());
    }
    Ok(())
}
