//! Simulate the coupled electron and cavity with thermal noise and compare the
//! homodyne spectrum with the closed-form response.
//!
//!     cargo run --release --example langevin_check [trajectories]

use electron_force_noise::langevin::{analytic_output, compare_to_analytic, simulate, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut sim = SimConfig::toy();
    if let Some(n) = std::env::args().nth(1) {
        sim.n_trajectories = n.parse()?;
    }
    let t0 = std::time::Instant::now();
    let r = simulate(&sim)?;
    let analytic = analytic_output(&sim, &r.freqs)?;
    let report = compare_to_analytic(&r, &analytic, 0.1, 3.0)?;

    let (center, width) = sim.analytic_line();
    println!("{} trajectories, {} segments, {:.1?}", sim.n_trajectories, r.segments, t0.elapsed());
    println!("center    {:.5} +- {:.5}  (expected {center:.5})", r.fit.center, r.center_err);
    println!("linewidth {:.5} +- {:.5}  (expected {width:.5})", r.fit.linewidth, r.linewidth_err);
    for b in &report.bins {
        println!("  [{:.4}, {:.4}]  sim/analytic {:.3}", b.lo, b.hi, b.ratio);
    }
    println!("{}", if report.pass { "agrees" } else { "DISAGREES" });
    Ok(())
}
