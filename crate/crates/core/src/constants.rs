//! Physical constants.

use serde::Serialize;

/// SI values of the constants the model needs.
///
/// Everything in the library takes a `&PhysConstants` instead of reading globals so the
/// time-domain oracle can run the same formulas in units where hbar = m = k_B = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysConstants {
    pub hbar: f64,
    pub e_charge: f64,
    pub m_electron: f64,
    pub eps0: f64,
    pub mu0: f64,
    pub k_b: f64,
    pub mu_b: f64,
    pub c_light: f64,
}

/// CODATA 2018.
pub const CODATA_2018: PhysConstants = PhysConstants {
    hbar: 1.054_571_817e-34,
    e_charge: 1.602_176_634e-19,
    m_electron: 9.109_383_701_5e-31,
    eps0: 8.854_187_812_8e-12,
    mu0: 1.256_637_062_12e-6,
    k_b: 1.380_649e-23,
    mu_b: 9.274_010_078_3e-24,
    c_light: 299_792_458.0,
};

impl Default for PhysConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

impl PhysConstants {
    /// Dimensionless units with hbar = m = k_B = e = eps0 = c = 1.
    ///
    /// Only meant for toy-scale validation runs; configs cannot select it.
    pub fn natural() -> Self {
        PhysConstants {
            hbar: 1.0,
            e_charge: 1.0,
            m_electron: 1.0,
            eps0: 1.0,
            mu0: 1.0,
            k_b: 1.0,
            mu_b: 1.0,
            c_light: 1.0,
        }
    }

    pub fn all_positive(&self) -> bool {
        [
            self.hbar,
            self.e_charge,
            self.m_electron,
            self.eps0,
            self.mu0,
            self.k_b,
            self.mu_b,
            self.c_light,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0)
    }
}

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn hz_to_rad(f: f64) -> f64 {
    TWO_PI * f
}

pub fn rad_to_hz(w: f64) -> f64 {
    w / TWO_PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codata_is_positive() {
        assert!(CODATA_2018.all_positive());
        assert!(PhysConstants::natural().all_positive());
    }

    #[test]
    fn mu0_eps0_c_consistent() {
        let k = CODATA_2018;
        let c2 = 1.0 / (k.mu0 * k.eps0);
        assert!((c2.sqrt() / k.c_light - 1.0).abs() < 1e-9);
    }
}
