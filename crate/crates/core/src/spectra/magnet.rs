use serde::Serialize;

use crate::constants::PhysConstants;
use crate::error::{Error, Result};
use crate::physics::{thermal_occupation, ElectronModes};

/// Permanent-magnet material in the one-dimensional spin-flip model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MagnetMaterial {
    pub g_s: f64,
    /// Unit-cell volume, m^3.
    pub v_uc: f64,
    /// Curie temperature, K.
    pub t_c: f64,
    /// Magnetization relaxation rate, rad/s.
    pub alpha_decay: f64,
    pub temperature: f64,
}

impl MagnetMaterial {
    fn moment_density(&self, k: &PhysConstants) -> f64 {
        self.g_s * k.mu_b / (2.0 * self.v_uc)
    }
}

/// Thermal variance of the magnetization about `m_mean` (A/m)^2.
pub fn magnetization_variance(k: &PhysConstants, mag: &MagnetMaterial, m_mean: f64) -> Result<f64> {
    let t = mag.temperature;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("magnet temperature {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let ratio = mag.t_c / t;
    let arg = 2.0 * mag.v_uc * m_mean / (mag.g_s * k.mu_b) * ratio;
    let ch = arg.cosh();
    Ok(mag.moment_density(k).powi(2) / (ratio + ch * ch))
}

/// Magnetization noise at zero mean magnetization: a Lorentzian of width alpha carrying the variance.
pub fn s_mm_barkhausen(k: &PhysConstants, omega: f64, mag: &MagnetMaterial) -> f64 {
    let t = mag.temperature;
    if t <= 0.0 {
        return 0.0;
    }
    let a = mag.alpha_decay;
    mag.moment_density(k).powi(2) * 2.0 * a / (omega * omega + a * a) * t / (t + mag.t_c)
}

/// Radial field noise, mu0^2 S_MM.
pub fn s_bb_barkhausen(k: &PhysConstants, omega: f64, mag: &MagnetMaterial) -> f64 {
    k.mu0 * k.mu0 * s_mm_barkhausen(k, omega, mag)
}

/// Mean radius and angular velocity of the thermal radial motion.
///
/// The occupancy factor multiplies the square root, as in the source model.
pub fn mean_orbit(k: &PhysConstants, modes: &ElectronModes, t: f64) -> Result<(f64, f64)> {
    if !(modes.omega_l > 0.0) {
        return Err(Error::TrapUnstable { omega_c: modes.omega_c, omega_z: modes.omega_z });
    }
    let n_plus = thermal_occupation(k, modes.omega_plus, t)?;
    let n_minus = thermal_occupation(k, modes.omega_minus, t)?;
    let rho = (2.0 * k.hbar / (k.m_electron * modes.omega_l)).sqrt() * (1.0 + n_plus + n_minus);
    let omega_bar = k.hbar / k.m_electron * (n_plus - n_minus) / (rho * rho);
    Ok((rho, omega_bar))
}

/// Axial Lorentz force from radial field noise acting on the orbiting electron.
pub fn s_ff_barkhausen(
    k: &PhysConstants,
    omega: f64,
    mag: &MagnetMaterial,
    modes: &ElectronModes,
    t_trap: f64,
) -> Result<f64> {
    let (rho, omega_bar) = mean_orbit(k, modes, t_trap)?;
    let lever = k.e_charge * omega_bar * rho;
    Ok(lever * lever * s_bb_barkhausen(k, omega, mag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::CODATA_2018;
    use crate::physics::{derive_modes, TrapConfig};

    fn smco(alpha: f64) -> MagnetMaterial {
        MagnetMaterial { g_s: 7.120, v_uc: 84.703e-30, t_c: 800.0, alpha_decay: alpha, temperature: 4.0 }
    }

    #[test]
    fn lorentzian_carries_the_variance() {
        let k = CODATA_2018;
        for alpha in [1.0, 3e3, 6.3e6] {
            let mag = smco(alpha);
            // trapezoid in ln(omega) over 16 decades either side; both tails are ~1e-8
            let n = 400_000;
            let (lo, hi) = ((alpha * 1e-8).ln(), (alpha * 1e8).ln());
            let h = (hi - lo) / n as f64;
            let mut area = 0.0;
            for i in 0..=n {
                let w = (lo + h * i as f64).exp();
                let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
                area += weight * s_mm_barkhausen(&k, w, &mag) * w * h;
            }
            // two-sided, per unit angular frequency
            let var = 2.0 * area / std::f64::consts::TAU;
            let expect = magnetization_variance(&k, &mag, 0.0).unwrap();
            assert!((var / expect - 1.0).abs() < 1e-6, "{alpha}: {var} vs {expect}");
        }
    }

    #[test]
    fn orbit_at_design_point() {
        let k = CODATA_2018;
        let trap = TrapConfig { v0: 19.3, b0: 0.5, z0: 50e-6, rho0: 50e-6 * 2f64.sqrt(), alpha_geom: 1.0, temperature: 4.0 };
        let modes = derive_modes(&k, &trap).unwrap();
        let (rho, omega_bar) = mean_orbit(&k, &modes, 4.0).unwrap();
        assert!(rho > 3.5e-6 && rho < 4.3e-6, "{rho}");
        assert!(omega_bar.abs() > 3e8 && omega_bar.abs() < 5e8, "{omega_bar}");
    }

    #[test]
    fn field_noise_is_mu0_squared_magnetization() {
        let k = CODATA_2018;
        let mag = smco(1e3);
        let w = 2e3;
        assert!((s_bb_barkhausen(&k, w, &mag) / (k.mu0 * k.mu0 * s_mm_barkhausen(&k, w, &mag)) - 1.0).abs() < 1e-15);
        assert_eq!(s_mm_barkhausen(&k, w, &MagnetMaterial { temperature: 0.0, ..mag }), 0.0);
    }
}
