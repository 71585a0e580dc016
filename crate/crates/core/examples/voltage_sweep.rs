//! Retune the trap voltage across the band and take the best floor at each frequency.
//!
//!     cargo run --release --example voltage_sweep

use electron_force_noise::budget::voltage_sweep;
use electron_force_noise::config::SystemConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = voltage_sweep(&SystemConfig::design_point(), 10.0, 50.0, 21)?;

    println!("{:>8} {:>12} {:>14}", "V0 [V]", "f_min [GHz]", "floor [N/rtHz]");
    for (v, (f, s)) in env.voltages.iter().zip(&env.minima) {
        println!("{v:>8.1} {:>12.4} {:>14.3e}", f / 1e9, s.sqrt());
    }
    for (v, why) in &env.skipped {
        println!("skipped {v} V: {why}");
    }

    // width of the band where the envelope stays within 10x of its best value
    let best = env.envelope.iter().cloned().fold(f64::INFINITY, f64::min);
    let inside: Vec<f64> = env.grid.iter().zip(&env.envelope).filter(|(_, s)| **s < 100.0 * best).map(|(f, _)| *f).collect();
    if let (Some(lo), Some(hi)) = (inside.first(), inside.last()) {
        println!("envelope within 10x of {:.3e}: {:.3}-{:.3} GHz", best.sqrt(), lo / 1e9, hi / 1e9);
    }
    Ok(())
}
