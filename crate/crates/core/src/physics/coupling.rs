use serde::Serialize;

use super::{CavityConfig, TrapConfig};
use crate::constants::PhysConstants;
use crate::error::{Error, Result};

/// Thin-film pickup antenna bridging the trap and the cavity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AntennaConfig {
    /// Total length, m.
    pub length: f64,
    pub width: f64,
    pub thickness: f64,
    /// Ohm m.
    pub resistivity: f64,
}

impl AntennaConfig {
    pub fn cross_section(&self) -> f64 {
        self.width * self.thickness
    }

    pub fn resistance(&self) -> f64 {
        self.resistivity * self.length / self.cross_section()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0 && self.thickness > 0.0) || !self.cross_section().is_finite() {
            return Err(Error::InvalidConfig(format!(
                "antenna length, width and thickness must be positive (got {}, {}, {})",
                self.length, self.width, self.thickness
            )));
        }
        if !(self.resistivity >= 0.0 && self.resistivity.is_finite()) {
            return Err(Error::InvalidConfig(format!("antenna resistivity must be >= 0, got {}", self.resistivity)));
        }
        Ok(())
    }
}

/// Half-wave length matched to the axial frequency.
pub fn auto_antenna_length(k: &PhysConstants, omega_z: f64) -> f64 {
    std::f64::consts::PI * k.c_light / omega_z
}

/// Electron-cavity coupling G in Hz/m: alpha e (l / 2 z0) sqrt(omega_k / (2 hbar eps0 V)).
pub fn coupling_strength(k: &PhysConstants, trap: &TrapConfig, cav: &CavityConfig, ant: &AntennaConfig) -> f64 {
    let dipole_arm = ant.length / (2.0 * trap.z0);
    let field_zp = (cav.omega_k / (2.0 * k.hbar * k.eps0 * cav.volume())).sqrt();
    trap.alpha_geom * k.e_charge * dipole_arm * field_zp
}
