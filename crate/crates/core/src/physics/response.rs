use num_complex::Complex64;

use super::{chi_cavity, chi_cavity_counter, CavityConfig};
use crate::constants::PhysConstants;
use crate::error::{Error, Result};

/// A complex susceptibility sample; `re`, `im`, `norm()` and `arg()` come from `Complex64`.
pub type ComplexResponse = Complex64;

fn mech_inverse(omega: f64, omega_z: f64, gamma: f64, m: f64) -> Complex64 {
    // (omega_z - omega)(omega_z + omega) keeps precision a few linewidths from resonance
    Complex64::new(m * (omega_z - omega) * (omega_z + omega), -m * gamma * omega)
}

/// Bare axial response 1 / (m (omega_z^2 - omega^2 - i gamma omega)).
pub fn chi_mech(omega: f64, omega_z: f64, gamma: f64, m: f64) -> Result<ComplexResponse> {
    let inv = mech_inverse(omega, omega_z, gamma, m);
    if inv.norm_sqr() == 0.0 {
        return Err(Error::SingularResponse(format!("undamped pole at omega = {omega}")));
    }
    Ok(inv.inv())
}

/// Axial response dressed by the cavity: chi_z^-1 - i hbar G^2 (chi_k - chi_k_counter).
pub fn chi_eff(
    k: &PhysConstants,
    omega: f64,
    omega_z: f64,
    gamma_intrinsic: f64,
    cav: &CavityConfig,
    g: f64,
    m: f64,
) -> Result<ComplexResponse> {
    let dynamic = Complex64::new(0.0, -k.hbar * g * g) * (chi_cavity(omega, cav) - chi_cavity_counter(omega, cav));
    let inv = mech_inverse(omega, omega_z, gamma_intrinsic, m) + dynamic;
    if inv.norm_sqr() == 0.0 || !inv.is_finite() {
        return Err(Error::SingularResponse(format!("effective response has a pole at omega = {omega}")));
    }
    Ok(inv.inv())
}

/// Cavity-induced frequency shift and damping of the axial mode, evaluated at omega_z.
pub fn dynamical_backaction(k: &PhysConstants, omega_z: f64, cav: &CavityConfig, g: f64, m: f64) -> (f64, f64) {
    let kappa = cav.kappa();
    let q = 0.25 * kappa * kappa;
    let below = omega_z - cav.omega_k;
    let above = omega_z + cav.omega_k;
    let pref = k.hbar * g * g / (2.0 * m * omega_z);
    let shift = pref * (below / (below * below + q) - above / (above * above + q));
    let damping = pref * kappa * (1.0 / (below * below + q) - 1.0 / (above * above + q));
    (shift, damping)
}
