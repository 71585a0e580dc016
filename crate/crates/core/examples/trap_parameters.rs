//! Mode frequencies, coupling and damping channels of a trap, without any spectra.
//!
//!     cargo run --example trap_parameters [v0_volts]

use electron_force_noise::budget::derived;
use electron_force_noise::config::SystemConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = SystemConfig::design_point();
    if let Some(v) = std::env::args().nth(1) {
        config.trap.v0_volts = v.parse()?;
    }
    let m = derived(&config.resolve()?)?;
    let tau = std::f64::consts::TAU;

    println!("axial      {:.5} GHz", m.modes.omega_z / tau / 1e9);
    println!("cyclotron  {:.5} GHz", m.modes.omega_plus / tau / 1e9);
    println!("magnetron  {:.3} MHz", m.modes.omega_minus / tau / 1e6);
    println!("z_zp       {:.3e} m", m.modes.z_zp);
    println!("G          {:.4e} Hz/m", m.coupling_g);
    println!("kappa_in   {:.4e} rad/s", m.kappa_in);
    println!("shift      {:.4e} rad/s", m.omega_ba);

    let d = m.damping;
    for (name, g) in [
        ("larmor", d.gamma_larmor),
        ("antenna", d.gamma_antenna),
        ("backaction", d.gamma_ba),
        ("dephasing", d.gamma_dephase),
        ("total", d.gamma_eff),
    ] {
        println!("  gamma {name:<11} {g:.4e} s^-1");
    }
    Ok(())
}
