use serde::Serialize;

use crate::constants::PhysConstants;
use crate::error::{Error, Result};

/// Trap electrode metal and its surface film.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ElectrodeMaterial {
    /// Ohm m.
    pub resistivity: f64,
    pub t_metal: f64,
    pub t_dielectric: f64,
    /// Absolute permittivity of the film, F/m.
    pub eps_dielectric: f64,
    /// Film loss tangent.
    pub loss_tangent_d: f64,
    /// Distance from the electron to the electrode surface, m.
    pub standoff_z: f64,
}

impl ElectrodeMaterial {
    pub fn validate(&self) -> Result<()> {
        let ok = self.resistivity >= 0.0
            && self.t_metal > 0.0
            && self.t_dielectric >= 0.0
            && self.eps_dielectric > 0.0
            && self.loss_tangent_d >= 0.0
            && self.loss_tangent_d < 1.0
            && self.standoff_z > 0.0;
        if !ok {
            return Err(Error::InvalidConfig(format!("electrode parameters out of range: {self:?}")));
        }
        Ok(())
    }
}

pub fn skin_depth(k: &PhysConstants, omega: f64, resistivity: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("skin depth needs omega > 0, got {omega}")));
    }
    Ok((2.0 * resistivity / (k.mu0 * omega)).sqrt())
}

/// Johnson noise of the electrodes, summed over both endcaps and the ring.
///
/// The governing length is the skin depth for thick metal and the film thickness
/// for thin metal; inside that length the near-field 1/z^3 form applies.
pub fn s_ff_johnson(k: &PhysConstants, omega: f64, el: &ElectrodeMaterial, t: f64) -> Result<f64> {
    let delta = skin_depth(k, omega, el.resistivity)?;
    let length = if el.t_metal > delta { delta } else { el.t_metal };
    let z = el.standoff_z;
    let pref = 3.0 * k.e_charge * k.e_charge * k.k_b * t * el.resistivity / (2.0 * std::f64::consts::PI);
    Ok(if z > length { pref / (z * z * length) } else { pref / (z * z * z) })
}

/// Loss in a thin dielectric film on the electrodes; falls as 1/omega.
pub fn s_ff_dielectric(k: &PhysConstants, omega: f64, el: &ElectrodeMaterial, t: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("dielectric noise diverges at omega = {omega}")));
    }
    let tan = el.loss_tangent_d;
    let shape = 3.0 / (4.0 * std::f64::consts::PI) * tan / (el.eps_dielectric * (1.0 + tan * tan));
    let z = el.standoff_z;
    Ok(3.0 * k.e_charge * k.e_charge * shape * k.k_b * t * el.t_dielectric / (omega * z.powi(4)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{hz_to_rad, CODATA_2018};

    fn gold(standoff: f64) -> ElectrodeMaterial {
        ElectrodeMaterial {
            resistivity: 22.1e-9,
            t_metal: 200e-9,
            t_dielectric: 2e-9,
            eps_dielectric: 2.0 * CODATA_2018.eps0,
            loss_tangent_d: 0.01,
            standoff_z: standoff,
        }
    }

    #[test]
    fn skin_depth_of_gold() {
        let k = CODATA_2018;
        let w = hz_to_rad(6e9);
        let d = skin_depth(&k, w, 22.1e-9).unwrap();
        assert!((d / 9.659188541641132e-7 - 1.0).abs() < 1e-9);
        assert!((skin_depth(&k, w, 4.0 * 22.1e-9).unwrap() / d - 2.0).abs() < 1e-12);
        assert!((skin_depth(&k, 4.0 * w, 22.1e-9).unwrap() / d - 0.5).abs() < 1e-12);
        assert!(skin_depth(&k, 0.0, 22.1e-9).is_err());
    }

    #[test]
    fn johnson_at_design_point() {
        let k = CODATA_2018;
        let s = s_ff_johnson(&k, hz_to_rad(5.86e9), &gold(50e-6), 4.0).unwrap();
        // thin film: the metal thickness sets the length
        let e = k.e_charge;
        let expect = 3.0 * e * e * k.k_b * 4.0 * 22.1e-9 / (2.0 * std::f64::consts::PI * 50e-6 * 50e-6 * 200e-9);
        assert!((s / expect - 1.0).abs() < 1e-12);
        assert!((s / 2.99e-53 - 1.0).abs() < 0.01);
    }

    #[test]
    fn johnson_branches_join() {
        let k = CODATA_2018;
        let w = hz_to_rad(6e9);
        let delta = skin_depth(&k, w, 22.1e-9).unwrap();
        // metal exactly one skin depth thick: both length choices coincide
        let mut el = gold(50e-6);
        el.t_metal = delta;
        let at = s_ff_johnson(&k, w, &el, 4.0).unwrap();
        el.t_metal = delta * (1.0 + 1e-12);
        let above = s_ff_johnson(&k, w, &el, 4.0).unwrap();
        assert!((at / above - 1.0).abs() < 1e-11);
        // standoff equal to the governing length
        let el = gold(200e-9);
        let inner = s_ff_johnson(&k, w, &ElectrodeMaterial { standoff_z: 200e-9 * (1.0 - 1e-15), ..el }, 4.0).unwrap();
        let edge = s_ff_johnson(&k, w, &el, 4.0).unwrap();
        assert!((inner / edge - 1.0).abs() < 1e-13);
    }

    #[test]
    fn dielectric_scales_inverse_with_frequency() {
        let k = CODATA_2018;
        let el = gold(50e-6);
        let w = hz_to_rad(5.86e9);
        let s = s_ff_dielectric(&k, w, &el, 4.0).unwrap();
        assert!((s / 4.98e-54 - 1.0).abs() < 0.01, "{s}");
        let s2 = s_ff_dielectric(&k, 2.0 * w, &el, 4.0).unwrap();
        assert!((s / s2 - 2.0).abs() < 1e-12);
        assert_eq!(s_ff_dielectric(&k, w, &el, 0.0).unwrap(), 0.0);
    }
}
