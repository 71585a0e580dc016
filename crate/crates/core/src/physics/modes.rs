use serde::Serialize;

use crate::constants::PhysConstants;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrapConfig {
    /// Trapping voltage, V.
    pub v0: f64,
    /// Axial magnetic field, T.
    pub b0: f64,
    /// Axial half-gap, m.
    pub z0: f64,
    /// Radial half-size, m.
    pub rho0: f64,
    /// Image-charge efficiency in (0, 1].
    pub alpha_geom: f64,
    /// Electrode / environment temperature, K.
    pub temperature: f64,
}

impl TrapConfig {
    /// Characteristic trap size.
    pub fn d(&self) -> f64 {
        (0.5 * (self.z0 * self.z0 + 0.5 * self.rho0 * self.rho0)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.v0) && pos(self.b0) && pos(self.z0) && pos(self.rho0)) {
            return Err(Error::InvalidConfig(format!(
                "trap needs positive v0, b0, z0, rho0 (got {}, {}, {}, {})",
                self.v0, self.b0, self.z0, self.rho0
            )));
        }
        if !(self.alpha_geom > 0.0 && self.alpha_geom <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha_geom must lie in (0, 1], got {}",
                self.alpha_geom
            )));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "trap temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Axial, cyclotron and magnetron frequencies (rad/s) of the ideal trap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ElectronModes {
    pub omega_z: f64,
    pub omega_c: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub omega_l: f64,
    /// Axial zero-point amplitude, m.
    pub z_zp: f64,
    pub stable: bool,
}

pub fn derive_modes(k: &PhysConstants, trap: &TrapConfig) -> Result<ElectronModes> {
    trap.validate()?;
    let d = trap.d();
    let m = k.m_electron;
    let omega_z = (k.e_charge * trap.v0 / (m * d * d)).sqrt();
    let omega_c = k.e_charge * trap.b0 / m;
    let disc = omega_c * omega_c - 2.0 * omega_z * omega_z;
    if !(disc > 0.0) {
        return Err(Error::TrapUnstable { omega_c, omega_z });
    }
    let omega_l = disc.sqrt();
    let omega_plus = 0.5 * (omega_c + omega_l);
    // Omega_+ Omega_- = Omega_z^2 / 2; this avoids the cancellation in (Omega_c - Omega_l) / 2.
    let omega_minus = omega_z * omega_z / (omega_c + omega_l);
    Ok(ElectronModes {
        omega_z,
        omega_c,
        omega_plus,
        omega_minus,
        omega_l,
        z_zp: (k.hbar / (2.0 * m * omega_z)).sqrt(),
        stable: true,
    })
}

/// Bose occupation at angular frequency `omega` and temperature `t`.
pub fn thermal_occupation(k: &PhysConstants, omega: f64, t: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("occupation needs omega > 0, got {omega}")));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::Domain(format!("negative temperature {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (k.hbar * omega / (k.k_b * t)).exp_m1())
}

/// n_th(|omega|) + 1/2, the symmetrized weight of a bath mode.
///
/// Written as coth/2 so it stays accurate at both ends; infinite at omega = 0 for T > 0.
pub fn occupation_plus_half(k: &PhysConstants, omega: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.5;
    }
    let x = k.hbar * omega.abs() / (k.k_b * t);
    if x == 0.0 {
        return f64::INFINITY;
    }
    0.5 + 1.0 / x.exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::CODATA_2018;

    fn design() -> TrapConfig {
        TrapConfig {
            v0: 19.3,
            b0: 0.5,
            z0: 50e-6,
            rho0: 50e-6 * 2f64.sqrt(),
            alpha_geom: 1.0,
            temperature: 4.0,
        }
    }

    #[test]
    fn design_frequencies() {
        let m = derive_modes(&CODATA_2018, &design()).unwrap();
        let fz = m.omega_z / crate::constants::TWO_PI;
        assert!((fz / 5.8646e9 - 1.0).abs() < 1e-4, "{fz}");
        assert!((m.omega_c / 8.7941e10 - 1.0).abs() < 1e-4);
        assert!((m.omega_plus / crate::constants::TWO_PI / 12.635e9 - 1.0).abs() < 1e-3);
        assert!((m.omega_minus / crate::constants::TWO_PI / 1.361e9 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn d_equals_z0_for_sqrt2_ratio() {
        let t = design();
        assert!((t.d() / t.z0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadrupled_voltage_doubles_axial() {
        let a = derive_modes(&CODATA_2018, &design()).unwrap();
        let b = derive_modes(&CODATA_2018, &TrapConfig { v0: 4.0 * 19.3, b0: 2.0, ..design() }).unwrap();
        assert!((b.omega_z / a.omega_z - 2.0).abs() < 1e-14);
    }

    #[test]
    fn unstable_reports_both() {
        let t = TrapConfig { v0: 200.0, ..design() };
        match derive_modes(&CODATA_2018, &t) {
            Err(Error::TrapUnstable { omega_c, omega_z }) => assert!(omega_c * omega_c <= 2.0 * omega_z * omega_z),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn occupation_values() {
        let k = CODATA_2018;
        assert_eq!(thermal_occupation(&k, 1e9, 0.0).unwrap(), 0.0);
        let t = 1.3;
        let w = k.k_b * t * 2f64.ln() / k.hbar;
        assert!((thermal_occupation(&k, w, t).unwrap() - 1.0).abs() < 1e-12);
        let n = thermal_occupation(&k, crate::constants::TWO_PI * 6e9, 4.0).unwrap();
        assert!((n - 13.397).abs() < 2e-3, "{n}");
        assert!(thermal_occupation(&k, 0.0, 1.0).is_err());
        assert!(thermal_occupation(&k, -1.0, 1.0).is_err());
    }
}
