use serde::Serialize;

use super::sim::{SimConfig, SimResult};
use crate::constants::PhysConstants;
use crate::error::{Error, Result};
use crate::physics::{chi_cavity, chi_cavity_counter, chi_eff, occupation_plus_half};
use crate::spectra::{s_ff_backaction_full, s_ff_cross_full, s_ff_imprecision_full, s_ff_intrinsic, s_ff_readout_additional};

/// Fine bins pooled per ratio bin, so single-bin scatter does not dominate the verdict.
const POOL: usize = 8;

/// Analytic spectra on a simulation's frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticOutput {
    pub freqs: Vec<f64>,
    pub psd_z: Vec<f64>,
    pub psd_quadrature: Vec<f64>,
    pub center: f64,
    pub linewidth: f64,
}

/// Displacement and homodyne spectra the analytic chain predicts for `sim`.
///
/// The homodyne record is the force-referred total scaled back by the transduction
/// kappa_in G^2 |chi e^{-i theta} - chi_counter e^{i theta}|^2 |chi_eff|^2.
pub fn analytic_output(sim: &SimConfig, freqs: &[f64]) -> Result<AnalyticOutput> {
    let k = PhysConstants::natural();
    let cav = sim.cavity();
    let g = sim.coupling;
    let (center, linewidth) = sim.analytic_line();
    let mut psd_z = Vec::with_capacity(freqs.len());
    let mut psd_q = Vec::with_capacity(freqs.len());
    for &w in freqs {
        let chi = chi_eff(&k, w, sim.omega_z, sim.gamma, &cav, g, 1.0)?;
        let int = s_ff_intrinsic(&k, w, 1.0, sim.gamma, sim.t_mech);
        let ba = s_ff_backaction_full(&k, w, &cav, g);
        let (ba_add, imp_add) = s_ff_readout_additional(&k, w, &cav, g, chi);
        psd_z.push(chi.norm_sqr() * (int + ba + ba_add));
        let co = chi_cavity(w, &cav);
        let counter = chi_cavity_counter(w, &cav);
        if g == 0.0 {
            let lower = occupation_plus_half(&k, w - sim.omega_in, sim.t_cav);
            let upper = occupation_plus_half(&k, w + sim.omega_in, sim.t_cav);
            let kin = sim.kappa_in;
            let loss = occupation_plus_half(&k, w, sim.t_cav);
            let leak = (1.0 - co * kin).norm_sqr() * lower
                + (1.0 - counter * kin).norm_sqr() * upper
                + kin * sim.kappa_add * loss * (co.norm_sqr() + counter.norm_sqr());
            psd_q.push(leak);
            continue;
        }
        let imp = s_ff_imprecision_full(&k, w, &cav, g, chi, sim.theta)?;
        let cross = s_ff_cross_full(&k, w, &cav, g, chi, sim.theta)?;
        let rot = num_complex::Complex64::from_polar(1.0, -sim.theta);
        let gain = sim.kappa_in * g * g * (co * rot - counter * rot.conj()).norm_sqr() * chi.norm_sqr();
        psd_q.push(gain * (int + ba + imp + 2.0 * cross.re + ba_add + imp_add));
    }
    Ok(AnalyticOutput { freqs: freqs.to_vec(), psd_z, psd_quadrature: psd_q, center, linewidth })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineCheck {
    pub simulated: f64,
    pub stat_err: f64,
    pub analytic: f64,
    /// |simulated - analytic| / stat_err.
    pub sigmas: f64,
    pub relative_deviation: f64,
}

impl LineCheck {
    fn new(simulated: f64, stat_err: f64, analytic: f64) -> Self {
        let diff = (simulated - analytic).abs();
        LineCheck {
            simulated,
            stat_err,
            analytic,
            sigmas: if stat_err > 0.0 { diff / stat_err } else { f64::INFINITY },
            relative_deviation: diff / analytic.abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandBin {
    pub lo: f64,
    pub hi: f64,
    /// Simulated over analytic power in the bin.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub center: LineCheck,
    pub linewidth: LineCheck,
    /// Half-power band of the analytic homodyne spectrum.
    pub band: (f64, f64),
    pub bins: Vec<BandBin>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub sigma_limit: f64,
    pub line_ok: bool,
    pub psd_ok: bool,
    pub pass: bool,
}

/// Line parameters must agree within `sigma_limit` statistical errors and the homodyne PSD
/// within `tolerance` (fractional) across the analytic half-power band.
pub fn compare_to_analytic(
    sim: &SimResult,
    analytic: &AnalyticOutput,
    tolerance: f64,
    sigma_limit: f64,
) -> Result<ComparisonReport> {
    if sim.freqs.len() != analytic.freqs.len()
        || sim.freqs.iter().zip(&analytic.freqs).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(b.abs()))
    {
        return Err(Error::GridMismatch(format!(
            "simulation has {} bins, analytic spectrum {}",
            sim.freqs.len(),
            analytic.freqs.len()
        )));
    }
    let center = LineCheck::new(sim.fit.center, sim.center_err, analytic.center);
    let linewidth = LineCheck::new(sim.fit.linewidth, sim.linewidth_err, analytic.linewidth);

    let s = &analytic.psd_quadrature;
    let ipk = (0..s.len()).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap_or(0);
    let half = 0.5 * s[ipk];
    let mut lo = ipk;
    while lo > 0 && s[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = ipk;
    while hi + 1 < s.len() && s[hi + 1] >= half {
        hi += 1;
    }
    let idx: Vec<usize> = (lo..=hi).collect();
    let bins: Vec<BandBin> = idx
        .chunks(POOL)
        .map(|ch| {
            let num: f64 = ch.iter().map(|&i| sim.psd_quadrature[i]).sum();
            let den: f64 = ch.iter().map(|&i| s[i]).sum();
            BandBin { lo: sim.freqs[ch[0]], hi: sim.freqs[ch[ch.len() - 1]], ratio: num / den }
        })
        .collect();
    let max_deviation = bins.iter().map(|b| (b.ratio - 1.0).abs()).fold(0.0, f64::max);
    let line_ok = center.sigmas <= sigma_limit && linewidth.sigmas <= sigma_limit;
    let psd_ok = max_deviation <= tolerance;
    Ok(ComparisonReport {
        center,
        linewidth,
        band: (sim.freqs[lo], sim.freqs[hi]),
        bins,
        max_deviation,
        tolerance,
        sigma_limit,
        line_ok,
        psd_ok,
        pass: line_ok && psd_ok,
    })
}
