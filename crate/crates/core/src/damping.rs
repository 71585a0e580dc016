//! Contributions to the effective axial damping rate.

use serde::{Deserialize, Serialize};

use crate::constants::PhysConstants;
use crate::error::{Error, Result};
use crate::physics::{
    coupling_strength, derive_modes, dynamical_backaction, thermal_occupation, AntennaConfig, CavityConfig,
    ElectronModes, TrapConfig,
};

/// Lowest-order multipole corrections to the trap fields.
///
/// The electrostatic terms are in volts, the magnetic curvature terms in tesla,
/// both normalised to the trap size d.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonIdealityConfig {
    pub phi40: f64,
    pub phi22: f64,
    pub phi04: f64,
    pub b20: f64,
    pub b02: f64,
}

/// Frequency shifts (rad/s) produced by the non-idealities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct KerrCoefficients {
    pub d_omega_z: f64,
    pub d_omega_plus: f64,
    pub d_omega_minus: f64,
    pub omega_zz: f64,
    pub omega_pp: f64,
    pub omega_mm: f64,
    pub omega_pz: f64,
    pub omega_mz: f64,
    pub omega_pm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DampingBreakdown {
    pub gamma_larmor: f64,
    pub gamma_antenna: f64,
    pub gamma_ba: f64,
    pub gamma_dephase: f64,
    pub gamma_eff: f64,
}

impl DampingBreakdown {
    /// Everything except dynamical backaction, which enters the response through the cavity term.
    pub fn gamma_intrinsic(&self) -> f64 {
        self.gamma_larmor + self.gamma_antenna + self.gamma_dephase
    }
}

/// Radiation damping of the axial dipole inside the cavity, e^2 pi^2 / (6 V Q eps0 m omega_z).
pub fn gamma_larmor_cavity(k: &PhysConstants, modes: &ElectronModes, cav: &CavityConfig) -> f64 {
    let e = k.e_charge;
    e * e * std::f64::consts::PI.powi(2)
        / (6.0 * cav.volume() * cav.loaded_q() * k.eps0 * k.m_electron * modes.omega_z)
}

/// Free-space Larmor damping rate of a charge oscillating at `omega`.
pub fn gamma_larmor_free(k: &PhysConstants, omega: f64) -> f64 {
    let e = k.e_charge;
    e * e * omega * omega / (6.0 * std::f64::consts::PI * k.eps0 * k.m_electron * k.c_light.powi(3))
}

/// Ohmic loss of the image current in the antenna, (e / 2 z0)^2 R / m.
pub fn gamma_antenna(k: &PhysConstants, trap: &TrapConfig, ant: &AntennaConfig) -> f64 {
    let arm = k.e_charge / (2.0 * trap.z0);
    arm * arm * ant.resistance() / k.m_electron
}

pub fn kerr_coefficients(
    k: &PhysConstants,
    modes: &ElectronModes,
    trap: &TrapConfig,
    ni: &NonIdealityConfig,
) -> Result<KerrCoefficients> {
    let disc = modes.omega_l * modes.omega_l;
    if !(disc > 0.0) {
        return Err(Error::TrapUnstable { omega_c: modes.omega_c, omega_z: modes.omega_z });
    }
    let (q, m, d) = (k.e_charge, k.m_electron, trap.d());
    let a = k.hbar * q / (d.powi(4) * m * m * disc);
    let b = k.hbar * q * q * trap.b0 / (d * d * m.powi(3) * disc);
    let c = k.hbar * q / (d * d * m * m * modes.omega_l);
    let radial = 2.0 * ni.b20 + 0.25 * ni.b02;
    let common = a * (16.0 * ni.phi40 + ni.phi22) + 2.0 * b * ni.b20;
    Ok(KerrCoefficients {
        d_omega_z: a * (3.0 * ni.phi04 + 2.0 * ni.phi22) + 0.5 * b * ni.b02,
        d_omega_plus: common + (b - c) * radial,
        d_omega_minus: common + (b + c) * radial,
        omega_zz: 1.5 * a * ni.phi04,
        omega_pp: 4.0 * a * ni.phi40 + (b - c) * ni.b20,
        omega_mm: 4.0 * a * ni.phi40 + (b + c) * ni.b20,
        omega_pz: 2.0 * a * ni.phi22 + 0.5 * (b - c) * ni.b02,
        omega_mz: 2.0 * a * ni.phi22 + 0.5 * (b + c) * ni.b02,
        omega_pm: 16.0 * a * ni.phi40 + 4.0 * b * ni.b20,
    })
}

/// Symmetrized number-fluctuation spectrum of a damped mode, a Lorentzian at twice its frequency.
pub fn s_number_cyclotron(omega: f64, n_plus: f64, gamma_plus: f64, omega_plus: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("number spectrum defined for omega > 0, got {omega}")));
    }
    if !(gamma_plus > 0.0) {
        return Err(Error::Domain(format!("cyclotron decay rate must be positive, got {gamma_plus}")));
    }
    let det = omega - 2.0 * omega_plus;
    Ok(2.0 * n_plus * (n_plus + 1.0) * gamma_plus / (gamma_plus * gamma_plus + det * det))
}

fn cross_kerr_dephasing(k: &PhysConstants, omega_z: f64, omega_j: f64, coupling: f64, t: f64) -> Result<f64> {
    let n = thermal_occupation(k, omega_j, t)?;
    let gamma_j = gamma_larmor_free(k, omega_j);
    let det = omega_z - 2.0 * omega_j;
    Ok(n * (n + 1.0) * gamma_j * coupling * coupling / (gamma_j * gamma_j + det * det))
}

/// Axial dephasing through the cross-Kerr coupling to the thermally fluctuating cyclotron number.
pub fn gamma_dephasing(k: &PhysConstants, modes: &ElectronModes, kerr: &KerrCoefficients, t: f64) -> Result<f64> {
    cross_kerr_dephasing(k, modes.omega_z, modes.omega_plus, kerr.omega_pz, t)
}

/// Small-occupation form gamma_+ (n Omega_+z / 2 Omega_+)^2.
pub fn gamma_dephasing_approx(k: &PhysConstants, modes: &ElectronModes, kerr: &KerrCoefficients, t: f64) -> Result<f64> {
    let n = thermal_occupation(k, modes.omega_plus, t)?;
    let r = n * kerr.omega_pz / (2.0 * modes.omega_plus);
    Ok(gamma_larmor_free(k, modes.omega_plus) * r * r)
}

/// Same construction through the magnetron number; diagnostic only, never part of gamma_eff.
pub fn gamma_dephasing_magnetron(
    k: &PhysConstants,
    modes: &ElectronModes,
    kerr: &KerrCoefficients,
    t: f64,
) -> Result<f64> {
    cross_kerr_dephasing(k, modes.omega_z, modes.omega_minus, kerr.omega_mz, t)
}

pub fn compose_damping(
    k: &PhysConstants,
    trap: &TrapConfig,
    cav: &CavityConfig,
    ant: &AntennaConfig,
    ni: &NonIdealityConfig,
) -> Result<DampingBreakdown> {
    let modes = derive_modes(k, trap)?;
    let g = coupling_strength(k, trap, cav, ant);
    let kerr = kerr_coefficients(k, &modes, trap, ni)?;
    let gamma_larmor = gamma_larmor_cavity(k, &modes, cav);
    let gamma_antenna = gamma_antenna(k, trap, ant);
    let (_, gamma_ba) = dynamical_backaction(k, modes.omega_z, cav, g, k.m_electron);
    let gamma_dephase = gamma_dephasing(k, &modes, &kerr, trap.temperature)?;
    Ok(DampingBreakdown {
        gamma_larmor,
        gamma_antenna,
        gamma_ba,
        gamma_dephase,
        gamma_eff: gamma_larmor + gamma_antenna + gamma_ba + gamma_dephase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{CODATA_2018, TWO_PI};

    fn trap(d: f64, v0: f64) -> TrapConfig {
        TrapConfig { v0, b0: 0.5, z0: d, rho0: d * 2f64.sqrt(), alpha_geom: 1.0, temperature: 4.0 }
    }

    #[test]
    fn ideal_trap_has_no_kerr_terms() {
        let t = trap(50e-6, 19.3);
        let m = derive_modes(&CODATA_2018, &t).unwrap();
        let kc = kerr_coefficients(&CODATA_2018, &m, &t, &NonIdealityConfig::default()).unwrap();
        assert_eq!(kc, KerrCoefficients::default());
        assert_eq!(gamma_dephasing(&CODATA_2018, &m, &kc, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn cyclotron_axial_difference_isolates_c_term() {
        let t = trap(50e-6, 19.3);
        let m = derive_modes(&CODATA_2018, &t).unwrap();
        let ni = NonIdealityConfig { phi22: 1.9, b02: 0.05, phi40: 0.3, phi04: -0.2, b20: 0.01 };
        let kc = kerr_coefficients(&CODATA_2018, &m, &t, &ni).unwrap();
        let k = CODATA_2018;
        let c = k.hbar * k.e_charge / (t.d().powi(2) * k.m_electron.powi(2) * m.omega_l);
        assert!(((kc.omega_pz - kc.omega_mz) / (-c * ni.b02) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn number_spectrum() {
        assert_eq!(s_number_cyclotron(3.0, 0.0, 0.1, 1.0).unwrap(), 0.0);
        let peak = s_number_cyclotron(2.0, 2.0, 0.1, 1.0).unwrap();
        assert!((peak - 2.0 * 6.0 / 0.1).abs() < 1e-12);
        assert!(s_number_cyclotron(0.0, 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn number_spectrum_normalisation() {
        // integral over omega > 0 of S domega / 2 pi is n (n + 1) for a narrow line
        let (n, g, wp) = (0.7, 1e-4, 1.0);
        let lo = 2.0 * wp - 2000.0 * g;
        let hi = 2.0 * wp + 2000.0 * g;
        let steps = 400_000;
        let h = (hi - lo) / steps as f64;
        let mut acc = 0.0;
        for i in 0..=steps {
            let w = lo + h * i as f64;
            let f = s_number_cyclotron(w, n, g, wp).unwrap();
            acc += if i == 0 || i == steps { 0.5 * f } else { f };
        }
        let integral = acc * h / TWO_PI;
        assert!((integral / (n * (n + 1.0)) - 1.0).abs() < 1e-3, "{integral}");
    }

    /// Known failure: the small-occupation form scales as n^2 and drops the axial frequency
    /// from the detuning, while the full rate scales as n (n + 1). At n << 1 the two differ
    /// by roughly 1 / n, so 1% agreement cannot hold.
    #[test]
    #[ignore = "known failure: the small-occupation form is not the n << 1 limit of the full rate"]
    fn approx_matches_at_low_occupation() {
        let t = TrapConfig { temperature: 0.1, ..trap(50e-6, 19.3) };
        let m = derive_modes(&CODATA_2018, &t).unwrap();
        let ni = NonIdealityConfig { phi22: 1.93, b02: 0.05, ..Default::default() };
        let kc = kerr_coefficients(&CODATA_2018, &m, &t, &ni).unwrap();
        assert!(thermal_occupation(&CODATA_2018, m.omega_plus, 0.1).unwrap() < 0.01);
        let full = gamma_dephasing(&CODATA_2018, &m, &kc, 0.1).unwrap();
        let approx = gamma_dephasing_approx(&CODATA_2018, &m, &kc, 0.1).unwrap();
        assert!((full / approx - 1.0).abs() < 0.01, "{full} {approx}");
    }

    #[test]
    fn full_over_approx_ratio() {
        let t = TrapConfig { temperature: 0.5, ..trap(50e-6, 19.3) };
        let m = derive_modes(&CODATA_2018, &t).unwrap();
        let ni = NonIdealityConfig { phi22: 1.93, b02: 0.05, ..Default::default() };
        let kc = kerr_coefficients(&CODATA_2018, &m, &t, &ni).unwrap();
        let n = thermal_occupation(&CODATA_2018, m.omega_plus, 0.5).unwrap();
        let det = m.omega_z - 2.0 * m.omega_plus;
        let gp = gamma_larmor_free(&CODATA_2018, m.omega_plus);
        let expect = (n + 1.0) / n * (2.0 * m.omega_plus).powi(2) / (gp * gp + det * det);
        let full = gamma_dephasing(&CODATA_2018, &m, &kc, 0.5).unwrap();
        let approx = gamma_dephasing_approx(&CODATA_2018, &m, &kc, 0.5).unwrap();
        assert!((full / approx / expect - 1.0).abs() < 1e-12, "{} vs {expect}", full / approx);
    }

    #[test]
    fn antenna_rate_scaling() {
        let ant = AntennaConfig { length: 0.0256, width: 0.05, thickness: 200e-9, resistivity: 22.1e-9 };
        let a = gamma_antenna(&CODATA_2018, &trap(50e-6, 19.3), &ant);
        let b = gamma_antenna(&CODATA_2018, &trap(25e-6, 19.3), &ant);
        assert!((b / a - 4.0).abs() < 1e-12);
        let zero = AntennaConfig { resistivity: 0.0, ..ant };
        assert_eq!(gamma_antenna(&CODATA_2018, &trap(50e-6, 19.3), &zero), 0.0);
    }

    #[test]
    fn larmor_cavity_scaling() {
        let t = trap(50e-6, 19.3);
        let m = derive_modes(&CODATA_2018, &t).unwrap();
        let cav = CavityConfig {
            omega_k: TWO_PI * 5.5e9,
            q_int: 1e5,
            q_ext: 1e3,
            dims: [0.256, 0.027, 0.150],
            omega_in: TWO_PI * 5.5e9,
            theta_lo: std::f64::consts::FRAC_PI_2,
            temperature: 4.0,
        };
        let a = gamma_larmor_cavity(&CODATA_2018, &m, &cav);
        let big = CavityConfig { dims: [0.512, 0.027, 0.150], ..cav };
        assert!((gamma_larmor_cavity(&CODATA_2018, &m, &big) / a - 0.5).abs() < 1e-12);
        let perfect = CavityConfig { q_int: f64::INFINITY, q_ext: f64::INFINITY, ..cav };
        assert_eq!(gamma_larmor_cavity(&CODATA_2018, &m, &perfect), 0.0);
    }
}
