use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CavityConfig {
    /// Mode frequency, rad/s.
    pub omega_k: f64,
    pub q_int: f64,
    pub q_ext: f64,
    /// Box dimensions, m.
    pub dims: [f64; 3],
    /// Drive frequency, rad/s.
    pub omega_in: f64,
    /// Homodyne angle, rad.
    pub theta_lo: f64,
    /// Bath temperature, K.
    pub temperature: f64,
}

impl CavityConfig {
    pub fn kappa_in(&self) -> f64 {
        self.omega_k / (2.0 * self.q_ext)
    }

    pub fn kappa_add(&self) -> f64 {
        self.omega_k / (2.0 * self.q_int)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_in() + self.kappa_add()
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    /// Loaded quality factor, combining the two loss ports in parallel.
    pub fn loaded_q(&self) -> f64 {
        1.0 / (1.0 / self.q_ext + 1.0 / self.q_int)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.omega_k) && pos(self.q_int) && pos(self.q_ext)) {
            return Err(Error::InvalidConfig(format!(
                "cavity needs positive frequency and quality factors (got {}, {}, {})",
                self.omega_k, self.q_int, self.q_ext
            )));
        }
        if !self.dims.iter().all(|&v| pos(v)) {
            return Err(Error::InvalidConfig(format!("cavity dimensions must be positive, got {:?}", self.dims)));
        }
        if !(self.omega_in.is_finite() && self.omega_in >= 0.0) {
            return Err(Error::InvalidConfig(format!("drive frequency must be >= 0, got {}", self.omega_in)));
        }
        if !self.theta_lo.is_finite() {
            return Err(Error::InvalidConfig("homodyne angle must be finite".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidConfig(format!("cavity temperature must be >= 0, got {}", self.temperature)));
        }
        Ok(())
    }
}

/// Co-rotating cavity response (-i(omega - omega_k) + kappa/2)^-1.
pub fn chi_cavity(omega: f64, cav: &CavityConfig) -> Complex64 {
    Complex64::new(0.5 * cav.kappa(), -(omega - cav.omega_k)).inv()
}

/// Counter-rotating cavity response (-i(omega + omega_k) + kappa/2)^-1, i.e. conj(chi(-omega)).
pub fn chi_cavity_counter(omega: f64, cav: &CavityConfig) -> Complex64 {
    Complex64::new(0.5 * cav.kappa(), -(omega + cav.omega_k)).inv()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn cav() -> CavityConfig {
        CavityConfig {
            omega_k: 3.0,
            q_int: 50.0,
            q_ext: 10.0,
            dims: [1.0, 2.0, 3.0],
            omega_in: 3.0,
            theta_lo: 0.0,
            temperature: 0.0,
        }
    }

    #[test]
    fn resonance_is_real() {
        let c = cav();
        let x = chi_cavity(c.omega_k, &c);
        assert!((x.re - 2.0 / c.kappa()).abs() < 1e-15 && x.im == 0.0);
    }

    #[test]
    fn half_width_point() {
        let c = cav();
        let x = chi_cavity(c.omega_k + 0.5 * c.kappa(), &c);
        assert!((x.norm() - 2f64.sqrt() / c.kappa()).abs() < 1e-14);
        assert!((x.arg() - FRAC_PI_4).abs() < 1e-14);
    }

    #[test]
    fn counter_magnitude() {
        let c = cav();
        let w = 1.7;
        let x = chi_cavity_counter(w, &c);
        let want = 1.0 / ((w + c.omega_k).powi(2) + 0.25 * c.kappa().powi(2));
        assert!((x.norm_sqr() / want - 1.0).abs() < 1e-14);
        assert!((x - chi_cavity(-w, &c).conj()).norm() < 1e-16);
    }

    #[test]
    fn rates() {
        let c = cav();
        assert_eq!(c.kappa_in(), 0.15);
        assert_eq!(c.kappa_add(), 0.03);
        assert!((c.loaded_q() - 1.0 / (0.1 + 0.02)).abs() < 1e-12);
        assert_eq!(c.volume(), 6.0);
    }
}
