//! Build a configuration in code, write it out, read it back, and run it.
//!
//!     cargo run --release --example custom_config

use electron_force_noise::budget::{assemble_budget, find_minimum, FrequencyGrid};
use electron_force_noise::config::SystemConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // colder, narrower antenna, uncertain channels switched on
    let mut config = SystemConfig::design_point();
    config.temperature_k = Some(0.1);
    config.antenna.width_m = 0.02;
    config.budget.include_uncertain = true;

    let dir = std::env::temp_dir().join("force_budget_example.cfg");
    std::fs::write(&dir, config.to_ini_string())?;
    let loaded = SystemConfig::load(&dir)?;
    assert_eq!(loaded, config);
    println!("{}", loaded.to_ini_string());

    for (label, c) in [("bundled", SystemConfig::design_point()), ("custom", loaded)] {
        let b = assemble_budget(&c, &FrequencyGrid::default_for(&c, 4096)?)?;
        let (f, floor) = find_minimum(&b)?;
        println!("{label:<8} floor {floor:.3e} N/sqrt(Hz) at {:.4} GHz", f / 1e9);
    }
    Ok(())
}
