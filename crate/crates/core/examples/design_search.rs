//! Search the antenna width and coupling Q for the lowest floor, then show
//! how sensitive the floor is to each knob on its own.
//!
//!     cargo run --release --example design_search

use electron_force_noise::config::SystemConfig;
use electron_force_noise::optimize::{optimize, sensitivity_table, Objective, ParamSpace, Scale};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = SystemConfig::design_point();
    let space = ParamSpace::new()
        .with("antenna.width_m", 0.005, 0.2, Scale::Log)?
        .with("cavity.q_ext", 1e2, 1e5, Scale::Log)?;

    let r = optimize(&base, &space, Objective::MinFloor, 120, 7)?;
    println!("best floor {:.3e} N/sqrt(Hz) after {} evaluations", r.best_objective, r.evaluations);
    for (name, v) in &r.best_params {
        println!("  {name} = {v:.4e}");
    }

    println!("\none-at-a-time scans around the design point:");
    for row in sensitivity_table(&base, &space, 7)? {
        println!("  {:<16} {:>10.3e} -> {:.3e}", row.param, row.value, row.floor);
    }
    Ok(())
}
