use num_complex::Complex64;

use crate::constants::PhysConstants;
use crate::error::{Error, Result};
use crate::physics::{chi_cavity, chi_cavity_counter, occupation_plus_half, CavityConfig, ComplexResponse};

/// Thermal plus zero-point force noise of the damped axial mode, 2 hbar m omega gamma (n + 1/2).
pub fn s_ff_intrinsic(k: &PhysConstants, omega: f64, m: f64, gamma_eff: f64, t: f64) -> f64 {
    2.0 * k.hbar * m * omega.abs() * gamma_eff * occupation_plus_half(k, omega, t)
}

/// Bath weights of the two drive sidebands at |omega -+ omega_in|.
fn sideband_weights(k: &PhysConstants, omega: f64, cav: &CavityConfig) -> (f64, f64) {
    (
        occupation_plus_half(k, omega - cav.omega_in, cav.temperature),
        occupation_plus_half(k, omega + cav.omega_in, cav.temperature),
    )
}

/// Radiation-pressure force noise from the input port, both sidebands.
pub fn s_ff_backaction_full(k: &PhysConstants, omega: f64, cav: &CavityConfig, g: f64) -> f64 {
    let (lower, upper) = sideband_weights(k, omega, cav);
    let co = chi_cavity(omega, cav).norm_sqr();
    let counter = chi_cavity_counter(omega, cav).norm_sqr();
    k.hbar * k.hbar * g * g * cav.kappa_in() * (co * lower + counter * upper)
}

/// Co-rotating Lorentzian only.
pub fn s_ff_backaction_approx(k: &PhysConstants, omega: f64, cav: &CavityConfig, g: f64) -> f64 {
    let (lower, _) = sideband_weights(k, omega, cav);
    let det = omega - cav.omega_k;
    let kappa = cav.kappa();
    k.hbar * k.hbar * g * g * cav.kappa_in() * lower / (det * det + 0.25 * kappa * kappa)
}

/// chi e^{-i theta} - chi_counter e^{i theta}: how much motion reaches the measured quadrature.
fn homodyne_gain(omega: f64, cav: &CavityConfig, theta: f64) -> Result<(Complex64, Complex64, Complex64)> {
    let chi = chi_cavity(omega, cav);
    let counter = chi_cavity_counter(omega, cav);
    let rot = Complex64::from_polar(1.0, -theta);
    let den = chi * rot - counter * rot.conj();
    if den.norm() <= 1e-14 * (chi.norm() + counter.norm()) {
        return Err(Error::QuadratureSingular { theta });
    }
    Ok((chi, counter, den))
}

/// Input-port shot noise referred to force through the effective response.
pub fn s_ff_imprecision_full(
    k: &PhysConstants,
    omega: f64,
    cav: &CavityConfig,
    g: f64,
    chi_eff: ComplexResponse,
    theta: f64,
) -> Result<f64> {
    let (chi, counter, den) = homodyne_gain(omega, cav, theta)?;
    let (lower, upper) = sideband_weights(k, omega, cav);
    let kin = cav.kappa_in();
    let leak = (1.0 - chi * kin).norm_sqr() * lower + (1.0 - counter * kin).norm_sqr() * upper;
    Ok(leak / (den.norm_sqr() * g * g * kin * chi_eff.norm_sqr()))
}

/// Phase-quadrature imprecision keeping only the co-rotating term.
pub fn s_ff_imprecision_approx(k: &PhysConstants, omega: f64, cav: &CavityConfig, g: f64, chi_eff: ComplexResponse) -> f64 {
    let (lower, _) = sideband_weights(k, omega, cav);
    let det = omega - cav.omega_k;
    let kappa = cav.kappa();
    (det * det + 0.25 * kappa * kappa) * lower / (g * g * cav.kappa_in() * chi_eff.norm_sqr())
}

/// Imprecision-backaction correlation; the total carries twice its real part.
pub fn s_ff_cross_full(
    k: &PhysConstants,
    omega: f64,
    cav: &CavityConfig,
    g: f64,
    chi_eff: ComplexResponse,
    theta: f64,
) -> Result<Complex64> {
    if g == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (chi, counter, den) = homodyne_gain(omega, cav, theta)?;
    let (lower, upper) = sideband_weights(k, omega, cav);
    let kin = cav.kappa_in();
    let rot = Complex64::from_polar(1.0, -theta);
    let corr = (1.0 - chi * kin) * chi.conj() * rot * lower + (1.0 - counter * kin) * counter.conj() * rot.conj() * upper;
    Ok(Complex64::new(0.0, k.hbar) / chi_eff * corr / den)
}

/// hbar / |chi_eff|, the floor on imprecision plus backaction.
pub fn sql_bound(k: &PhysConstants, chi_eff: ComplexResponse) -> Result<f64> {
    let mag = chi_eff.norm();
    if !(mag.is_finite() && mag > 0.0) {
        return Err(Error::SingularResponse(format!("|chi_eff| = {mag}")));
    }
    Ok(k.hbar / mag)
}

/// Backaction and imprecision from the internal-loss port, phase quadrature.
pub fn s_ff_readout_additional(
    k: &PhysConstants,
    omega: f64,
    cav: &CavityConfig,
    g: f64,
    chi_eff: ComplexResponse,
) -> (f64, f64) {
    let kadd = cav.kappa_add();
    if kadd == 0.0 {
        return (0.0, 0.0);
    }
    let weight = occupation_plus_half(k, omega, cav.temperature);
    let chi = chi_cavity(omega, cav);
    let counter = chi_cavity_counter(omega, cav);
    let both = chi.norm_sqr() + counter.norm_sqr();
    let ba = k.hbar * k.hbar * g * g * kadd * weight * both;
    let imp = kadd * weight / (g * g * chi_eff.norm_sqr()) * both / (chi + counter).norm_sqr();
    (ba, imp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::chi_eff;
    use std::f64::consts::FRAC_PI_2;

    fn cavity(omega_k: f64, q_ext: f64, q_int: f64, t: f64) -> CavityConfig {
        CavityConfig {
            omega_k,
            q_int,
            q_ext,
            dims: [1.0; 3],
            omega_in: omega_k,
            theta_lo: FRAC_PI_2,
            temperature: t,
        }
    }

    #[test]
    fn vacuum_backaction_on_resonance() {
        let k = PhysConstants::natural();
        let c = cavity(1.0, 50.0, f64::INFINITY, 0.0);
        let g = 0.3;
        let kappa = c.kappa();
        let counter = chi_cavity_counter(1.0, &c).norm_sqr();
        let expect = g * g * c.kappa_in() * 0.5 * (4.0 / (kappa * kappa) + counter);
        assert!((s_ff_backaction_full(&k, 1.0, &c, g) / expect - 1.0).abs() < 1e-13);
    }

    #[test]
    fn coupling_scalings() {
        let k = PhysConstants::natural();
        let c = cavity(0.8, 40.0, 1e4, 0.3);
        let w = 1.01;
        let chi = chi_eff(&k, w, 1.0, 0.01, &c, 0.05, 1.0).unwrap();
        let ba1 = s_ff_backaction_full(&k, w, &c, 0.05);
        let ba2 = s_ff_backaction_full(&k, w, &c, 0.1);
        assert!((ba2 / ba1 - 4.0).abs() < 1e-12);
        let i1 = s_ff_imprecision_full(&k, w, &c, 0.05, chi, FRAC_PI_2).unwrap();
        let i2 = s_ff_imprecision_full(&k, w, &c, 0.1, chi, FRAC_PI_2).unwrap();
        assert!((i1 / i2 - 4.0).abs() < 1e-12);
        assert_eq!(s_ff_cross_full(&k, w, &c, 0.0, chi, FRAC_PI_2).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn backaction_reduces_to_lorentzian() {
        let k = PhysConstants::natural();
        // kappa << detuning << omega_k
        let c = cavity(1.0, 5e4, f64::INFINITY, 0.0);
        for w in [1.01, 1.02, 0.98] {
            let full = s_ff_backaction_full(&k, w, &c, 0.01);
            let approx = s_ff_backaction_approx(&k, w, &c, 0.01);
            assert!((full / approx - 1.0).abs() < 1e-2, "{w}");
        }
    }

    #[test]
    fn approximate_product_is_coupling_free() {
        let k = PhysConstants::natural();
        let c = cavity(0.8, 40.0, 1e4, 0.0);
        let w = 1.0;
        let mut products = Vec::new();
        for g in [0.01, 0.05, 0.2] {
            let chi = chi_eff(&k, w, 1.0, 0.01, &c, g, 1.0).unwrap();
            let imp_z = s_ff_imprecision_approx(&k, w, &c, g, chi) * chi.norm_sqr();
            products.push(imp_z * s_ff_backaction_approx(&k, w, &c, g));
        }
        for p in &products {
            assert!((p / 0.25 - 1.0).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn readout_sum_respects_the_bound() {
        let k = PhysConstants::natural();
        let c = cavity(0.8, 40.0, f64::INFINITY, 0.0);
        let g = 0.07;
        for i in 0..200 {
            let w = 0.5 + i as f64 * 0.005;
            let chi = chi_eff(&k, w, 1.0, 0.01, &c, g, 1.0).unwrap();
            let sum = s_ff_backaction_full(&k, w, &c, g) + s_ff_imprecision_full(&k, w, &c, g, chi, FRAC_PI_2).unwrap();
            let cross = 2.0 * s_ff_cross_full(&k, w, &c, g, chi, FRAC_PI_2).unwrap().re;
            assert!(sum >= sql_bound(&k, chi).unwrap());
            assert!(sum + cross >= 0.0);
        }
    }

    #[test]
    fn sql_near_resonance_and_singular_quadrature() {
        let k = PhysConstants::natural();
        let c = cavity(0.8, 40.0, f64::INFINITY, 0.0);
        let chi = chi_eff(&k, 1.0, 1.0, 0.02, &c, 0.0, 1.0).unwrap();
        assert!((sql_bound(&k, chi).unwrap() / (0.02 * 1.0) - 1.0).abs() < 1e-12);
        let chi2 = chi_eff(&k, 1.0, 1.0, 0.04, &c, 0.0, 1.0).unwrap();
        assert!((sql_bound(&k, chi2).unwrap() / sql_bound(&k, chi).unwrap() - 2.0).abs() < 1e-12);
        // at zero frequency both sidebands have equal weight, so one quadrature is blind
        let chi0 = chi_eff(&k, 0.0, 1.0, 0.02, &c, 0.1, 1.0).unwrap();
        let blind = -(chi_cavity_counter(0.0, &c) / chi_cavity(0.0, &c)).arg() / 2.0;
        assert!(matches!(
            s_ff_imprecision_full(&k, 0.0, &c, 0.1, chi0, blind),
            Err(Error::QuadratureSingular { .. })
        ));
    }

    #[test]
    fn lossless_cavity_adds_nothing() {
        let k = PhysConstants::natural();
        let c = cavity(0.8, 40.0, f64::INFINITY, 0.5);
        let chi = chi_eff(&k, 1.0, 1.0, 0.02, &c, 0.1, 1.0).unwrap();
        assert_eq!(s_ff_readout_additional(&k, 1.0, &c, 0.1, chi), (0.0, 0.0));
        let lossy = cavity(0.8, 40.0, 400.0, 0.0);
        let (ba, _) = s_ff_readout_additional(&k, 0.8, &lossy, 0.1, chi);
        let both = chi_cavity(0.8, &lossy).norm_sqr() + chi_cavity_counter(0.8, &lossy).norm_sqr();
        assert!((ba / (0.01 * lossy.kappa_add() * 0.5 * both) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn intrinsic_limits() {
        let k = PhysConstants::natural();
        assert!((s_ff_intrinsic(&k, 2.0, 3.0, 0.1, 0.0) - 0.6).abs() < 1e-15);
        // classical: 2 m gamma k_B T once hbar omega << k_B T
        let hot = s_ff_intrinsic(&k, 1.0, 1.0, 0.1, 200.0);
        assert!((hot / (2.0 * 0.1 * 200.0) - 1.0).abs() < 1e-4);
    }
}
