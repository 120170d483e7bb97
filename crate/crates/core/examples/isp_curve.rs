//! The power-law tone curve: the key value always lands on mid-gray.

use ae_sim::isp::IspProfile;

fn main() -> ae_sim::Result<()> {
    for key in [0.05, 0.13, 0.18, 0.3] {
        let isp = IspProfile::new(key)?;
        print!("key {key:<5} gamma {:.6} |", isp.gamma_exponent());
        for v in [0.0, 0.01, key, 0.5, 1.0] {
            print!(" {v:.2}->{:>3}", isp.encode(v));
        }
        println!();
    }
    Ok(())
}
