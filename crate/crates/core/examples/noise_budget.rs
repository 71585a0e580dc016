//! Force noise budget of the bundled design point: floor, where it sits, and which
//! channel dominates there.
//!
//!     cargo run --release --example noise_budget [out.csv]

use electron_force_noise::budget::{assemble_budget, find_minimum, FrequencyGrid};
use electron_force_noise::cli::budget_csv;
use electron_force_noise::config::SystemConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SystemConfig::design_point();
    let grid = FrequencyGrid::default_for(&config, 4096)?;
    let budget = assemble_budget(&config, &grid)?;
    let (f_min, floor) = find_minimum(&budget)?;

    println!("axial line   {:.4} GHz", budget.meta.f_z_eff_hz / 1e9);
    println!("coupling G   {:.3e} Hz/m", budget.meta.coupling_g);
    println!("floor        {floor:.3e} N/sqrt(Hz) at {:.4} GHz", f_min / 1e9);

    // readout terms interfere through the signed cross term, so show each channel on its own
    let i = grid.points.iter().position(|&f| f >= f_min).unwrap_or(grid.len() - 1);
    for ch in &budget.channels {
        let v = ch.values[i];
        println!("  {:<14} {}{:.3e} N/sqrt(Hz)", ch.name, if v < 0.0 { "-" } else { " " }, v.abs().sqrt());
    }

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, budget_csv(&budget))?;
        println!("wrote {} rows to {path}", grid.len());
    }
    Ok(())
}
