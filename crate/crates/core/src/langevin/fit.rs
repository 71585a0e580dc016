//! Resonance fitting on averaged periodograms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simplex::{minimize, SimplexOptions};

/// Driven-oscillator line A / ((c^2 - w^2)^2 + (Gamma w)^2) with a linear tilt (1 + s (w - c)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub center: f64,
    pub linewidth: f64,
    pub amplitude: f64,
    pub tilt: f64,
}

impl LineFit {
    pub fn eval(&self, w: f64) -> f64 {
        let d = (self.center - w) * (self.center + w);
        self.amplitude / (d * d + self.linewidth * self.linewidth * w * w) * (1.0 + self.tilt * (w - self.center))
    }
}

/// Half-widths of the fit window, in linewidths.
pub const FIT_HALF_WINDOW: f64 = 5.0;

/// Whittle fit of the strongest peak. Needs the line resolved by at least a dozen bins.
pub fn fit_resonance(freqs: &[f64], psd: &[f64]) -> Result<LineFit> {
    if freqs.len() != psd.len() || freqs.len() < 16 {
        return Err(Error::GridMismatch(format!("{} frequencies for {} PSD values", freqs.len(), psd.len())));
    }
    let (ipk, &peak) = psd
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Domain("empty spectrum".into()))?;
    let half = 0.5 * peak;
    let lo = (0..ipk).rev().find(|&i| psd[i] < half).unwrap_or(0);
    let hi = (ipk..psd.len()).find(|&i| psd[i] < half).unwrap_or(psd.len() - 1);
    let c0 = freqs[ipk];
    let g0 = (freqs[hi] - freqs[lo]).max(freqs[1] - freqs[0]);
    let w_lo = c0 - FIT_HALF_WINDOW * g0;
    let w_hi = c0 + FIT_HALF_WINDOW * g0;
    let idx: Vec<usize> = (0..freqs.len()).filter(|&i| freqs[i] >= w_lo && freqs[i] <= w_hi).collect();
    if idx.len() < 12 {
        return Err(Error::Domain(format!(
            "resonance spans only {} bins; lengthen the segments",
            idx.len()
        )));
    }
    let a0 = peak * (g0 * c0).powi(2);
    let unpack = |p: &[f64]| LineFit {
        amplitude: a0 * p[0].exp(),
        center: c0 + p[1] * g0,
        linewidth: g0 * p[2].exp(),
        tilt: p[3] / g0,
    };
    // Whittle negative log-likelihood for averaged periodograms
    let nll = |p: &[f64]| {
        let m = unpack(p);
        let mut acc = 0.0;
        for &i in &idx {
            let s = m.eval(freqs[i]);
            if !(s > 0.0) {
                return Ok(f64::INFINITY);
            }
            acc += psd[i] / s + s.ln();
        }
        Ok(acc)
    };
    let opts = SimplexOptions { step: vec![0.2, 0.1, 0.2, 0.05], tol: 1e-9, max_evals: 20_000, bounds: None };
    let mut best = minimize(nll, &[0.0, 0.0, 0.0, 0.0], None, &opts)?;
    // restart once from the optimum to shake off a collapsed simplex
    best = minimize(nll, &best.x, Some(best.value), &opts)?;
    let fit = unpack(&best.x);
    if !(fit.linewidth > 0.0 && fit.center.is_finite()) {
        return Err(Error::Domain("line fit did not converge".into()));
    }
    let bin = freqs[1] - freqs[0];
    if fit.linewidth.abs() < 2.0 * bin {
        return Err(Error::Domain(format!(
            "fitted linewidth {:.3e} is under two bins ({bin:.3e}); lengthen the segments",
            fit.linewidth.abs()
        )));
    }
    Ok(LineFit { linewidth: fit.linewidth.abs(), ..fit })
}
