use serde::Serialize;

use crate::constants::PhysConstants;
use crate::error::{Error, Result};

/// erg^-1 cm^-3 to J^-1 m^-3.
pub const P0_CGS_TO_SI: f64 = 1e7 * 1e6;

/// Two-level-system defect bath in an amorphous host.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TlsMaterial {
    /// Spectral density of states, J^-1 m^-3.
    pub p0: f64,
    /// Relaxation-rate prefactor A in tau_min = 1 / (A T^3), s^-1 K^-3.
    pub a_rate: f64,
    /// Defect dipole moment, C m.
    pub dipole_p: f64,
    pub eps_r: f64,
    /// Experiment duration, s.
    pub t_exp: f64,
    /// Volume of host material seen by the mode, m^3.
    pub v_tls: f64,
}

impl TlsMaterial {
    fn strength(&self, k: &PhysConstants) -> f64 {
        self.p0 * self.dipole_p * self.dipole_p / (k.eps0 * self.eps_r)
    }
}

/// Integral of sqrt(1 - tau_min / tau) omega / (1 + (omega tau)^2) over tau in [tau_min, t_exp].
///
/// In u = omega tau the integrand is sqrt(1 - u0 / u) / (1 + u^2). The range is cut into
/// decades handled by double-exponential quadrature, and beyond 10^6 max(1, u0) the
/// two-term asymptotic tail is added in closed form.
pub fn tls_relaxation_integral(omega: f64, tau_min: f64, t_exp: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("TLS loss needs omega > 0, got {omega}")));
    }
    if !(t_exp > tau_min) {
        return Err(Error::Domain(format!("experiment time {t_exp} s must exceed tau_min {tau_min} s")));
    }
    let u0 = omega * tau_min;
    let u_end = omega * t_exp;
    let scale = 1.0 / u0.max(1.0);
    let cut = u_end.min(1e6 * u0.max(1.0));
    let f = |u: f64| (1.0 - u0 / u).max(0.0).sqrt() / (1.0 + u * u);

    let mut edges = vec![u0];
    let mut next = if u0 > 0.0 { u0 } else { 1e-12 };
    loop {
        next *= 10.0;
        if next >= cut {
            break;
        }
        edges.push(next);
    }
    edges.push(cut);

    let pieces = (edges.len() - 1) as f64;
    let target = 1e-12 * scale / pieces;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    for w in edges.windows(2) {
        let out = quadrature::double_exponential::integrate(f, w[0], w[1], target);
        total += out.integral;
        err += out.error_estimate;
        evals += out.num_function_evaluations as usize;
    }
    if cut < u_end {
        let tail = |u: f64| 1.0 / u - 0.25 * u0 / (u * u) - 1.0 / (3.0 * u * u * u);
        total += tail(cut) - tail(u_end);
    }
    if !(err <= 1e-6 * total.abs()) || !total.is_finite() {
        return Err(Error::IntegrationFailure { rel_err: err / total.abs(), evals });
    }
    Ok(total)
}

/// Resonant plus relaxation loss tangent.
pub fn tls_loss_tangent(k: &PhysConstants, omega: f64, tls: &TlsMaterial, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("TLS loss tangent needs T > 0, got {t}")));
    }
    let strength = tls.strength(k);
    let resonant = strength * std::f64::consts::PI / 3.0 * (k.hbar * omega / (2.0 * k.k_b * t)).tanh();
    let tau_min = 1.0 / (tls.a_rate * t.powi(3));
    let relaxation = strength * tls_relaxation_integral(omega, tau_min, tls.t_exp)?;
    Ok(resonant + relaxation)
}

/// Field noise from the TLS bath, referred to force through the effective dipole charge.
///
/// hbar G / E_zp reduces to alpha e l / (2 z0), passed in as `dipole_charge_arm`.
/// The fluctuation-dissipation form is used in magnitude.
pub fn s_ff_tls(
    k: &PhysConstants,
    omega: f64,
    tls: &TlsMaterial,
    dipole_charge_arm: f64,
    t: f64,
) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let tan = tls_loss_tangent(k, omega, tls, t)?;
    let host = 1.0 - 1.0 / tls.eps_r;
    let s_ee = 2.0 * k.k_b * t / omega / (k.eps0 * tls.eps_r * tls.v_tls) * tan / (host * host + tan * tan);
    Ok(dipole_charge_arm * dipole_charge_arm * s_ee)
}
