//! Assembly of all channels on a frequency grid, minimum search and voltage sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::SystemConfig;
use crate::constants::{hz_to_rad, rad_to_hz, PhysConstants};
use crate::damping::{compose_damping, DampingBreakdown};
use crate::error::{Error, Result};
use crate::physics::{chi_eff, coupling_strength, dynamical_backaction, ElectronModes};
use crate::config::ResolvedSystem;
use crate::spectra::{
    s_ff_backaction_full, s_ff_barkhausen, s_ff_cross_full, s_ff_dielectric, s_ff_imprecision_full, s_ff_intrinsic,
    s_ff_johnson, s_ff_readout_additional, s_ff_tls, sql_bound, SpectrumChannel,
};

/// Channel order used in memory and in CSV output.
pub const CHANNEL_NAMES: [&str; 11] = [
    "int",
    "ba",
    "imp",
    "cross2re",
    "read_add",
    "johnson",
    "dielectric",
    "barkhausen_lo",
    "barkhausen_hi",
    "tls",
    "sql",
];

/// Lower edge of the default band, Hz.
pub const DEFAULT_F_LO: f64 = 1e9;
/// Upper edge of the default band, Hz.
pub const DEFAULT_F_HI: f64 = 20e9;
pub const DEFAULT_POINTS: usize = 4096;
/// Points packed around the axial resonance in a refined grid.
pub const REFINED_POINTS: usize = 512;
/// Half-width of the refined window in units of gamma_eff.
pub const REFINED_HALF_WIDTH: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Linear,
    Log,
    Refined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyGrid {
    /// Hz, strictly increasing.
    pub points: Vec<f64>,
    pub kind: GridKind,
}

impl FrequencyGrid {
    pub fn linear(f_lo: f64, f_hi: f64, n: usize) -> Result<Self> {
        check_band(f_lo, f_hi, n)?;
        let h = (f_hi - f_lo) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| f_lo + h * i as f64).collect();
        points[n - 1] = f_hi;
        Ok(FrequencyGrid { points, kind: GridKind::Linear })
    }

    pub fn log(f_lo: f64, f_hi: f64, n: usize) -> Result<Self> {
        check_band(f_lo, f_hi, n)?;
        if f_lo <= 0.0 {
            return Err(Error::RefusesGrid(format!("log grid needs f_lo > 0, got {f_lo}")));
        }
        let (a, b) = (f_lo.ln(), f_hi.ln());
        let h = (b - a) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| (a + h * i as f64).exp()).collect();
        points[0] = f_lo;
        points[n - 1] = f_hi;
        Ok(FrequencyGrid { points, kind: GridKind::Log })
    }

    /// Log grid over [f_lo, f_hi] with `n_fine` evenly spaced points in [center - half, center + half].
    ///
    /// The total stays at `n`: the log part gets whatever the window does not use.
    pub fn refined(f_lo: f64, f_hi: f64, n: usize, center: f64, half: f64, n_fine: usize) -> Result<Self> {
        if n_fine < 3 || n_fine + 2 > n || !(half > 0.0) {
            return Err(Error::RefusesGrid(format!("bad refinement: n = {n}, n_fine = {n_fine}, half = {half}")));
        }
        if !(center - half > f_lo && center + half < f_hi) {
            return Err(Error::RefusesGrid(format!(
                "resonance window {:.6e} +- {:.3e} Hz lies outside [{f_lo:.3e}, {f_hi:.3e}]",
                center, half
            )));
        }
        let (lo, hi) = (center - half, center + half);
        let base: Vec<f64> = FrequencyGrid::log(f_lo, f_hi, n - n_fine)?
            .points
            .into_iter()
            .filter(|&f| f < lo || f > hi)
            .collect();
        let fine = FrequencyGrid::linear(lo, hi, n - base.len())?;
        let mut points: Vec<f64> = base.into_iter().chain(fine.points).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(FrequencyGrid { points, kind: GridKind::Refined })
    }

    /// The default 1-20 GHz grid refined around the effective axial frequency.
    pub fn default_for(config: &SystemConfig, n: usize) -> Result<Self> {
        let r = config.resolve()?;
        let d = derived(&r)?;
        let half = REFINED_HALF_WIDTH * rad_to_hz(d.damping.gamma_eff);
        FrequencyGrid::refined(DEFAULT_F_LO, DEFAULT_F_HI, n, d.f_z_eff_hz, half, REFINED_POINTS.min(n / 4))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::RefusesGrid("grid needs at least 2 points".into()));
        }
        if !self.points.windows(2).all(|w| w[1] > w[0]) || !self.points.iter().all(|f| f.is_finite() && *f > 0.0) {
            return Err(Error::RefusesGrid("grid must be positive and strictly increasing".into()));
        }
        Ok(())
    }

    /// Points within `half` of `center`.
    pub fn count_within(&self, center: f64, half: f64) -> usize {
        self.points.iter().filter(|&&f| (f - center).abs() <= half).count()
    }
}

fn check_band(f_lo: f64, f_hi: f64, n: usize) -> Result<()> {
    if n < 2 || !(f_hi > f_lo) || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::RefusesGrid(format!("bad band [{f_lo}, {f_hi}] with {n} points")));
    }
    Ok(())
}

/// Derived quantities carried with every budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetMeta {
    pub system: ResolvedSystem,
    pub modes: ElectronModes,
    /// Hz/m.
    pub coupling_g: f64,
    pub damping: DampingBreakdown,
    /// rad/s.
    pub omega_ba: f64,
    pub omega_z_eff: f64,
    pub f_z_eff_hz: f64,
    pub kappa_in: f64,
    pub kappa_add: f64,
}

pub fn derived(r: &ResolvedSystem) -> Result<BudgetMeta> {
    let k = &r.constants;
    let g = coupling_strength(k, &r.trap, &r.cavity, &r.antenna);
    let damping = compose_damping(k, &r.trap, &r.cavity, &r.antenna, &r.nonideal)?;
    let (omega_ba, _) = dynamical_backaction(k, r.modes.omega_z, &r.cavity, g, k.m_electron);
    let omega_z_eff = r.modes.omega_z + omega_ba;
    Ok(BudgetMeta {
        system: r.clone(),
        modes: r.modes,
        coupling_g: g,
        damping,
        omega_ba,
        omega_z_eff,
        f_z_eff_hz: rad_to_hz(omega_z_eff),
        kappa_in: r.cavity.kappa_in(),
        kappa_add: r.cavity.kappa_add(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseBudget {
    pub grid: FrequencyGrid,
    /// In [`CHANNEL_NAMES`] order, N^2/Hz; `cross2re` is signed.
    pub channels: Vec<SpectrumChannel>,
    pub total: SpectrumChannel,
    pub include_uncertain: bool,
    pub meta: BudgetMeta,
}

impl NoiseBudget {
    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }
}

/// Everything at one frequency, N^2/Hz, in [`CHANNEL_NAMES`] order.
fn point(r: &ResolvedSystem, meta: &BudgetMeta, f_hz: f64) -> Result<[f64; 11]> {
    let k: &PhysConstants = &r.constants;
    let w = hz_to_rad(f_hz);
    let m = k.m_electron;
    let g = meta.coupling_g;
    let cav = &r.cavity;
    let t = r.trap.temperature;
    let chi = chi_eff(k, w, r.modes.omega_z, meta.damping.gamma_intrinsic(), cav, g, m)?;
    let int = s_ff_intrinsic(k, w, m, meta.damping.gamma_eff, t);
    let ba = s_ff_backaction_full(k, w, cav, g);
    let imp = s_ff_imprecision_full(k, w, cav, g, chi, cav.theta_lo)?;
    let cross2re = 2.0 * s_ff_cross_full(k, w, cav, g, chi, cav.theta_lo)?.re;
    let (ba_add, imp_add) = s_ff_readout_additional(k, w, cav, g, chi);
    let johnson = s_ff_johnson(k, w, &r.electrode, t)?;
    let dielectric = s_ff_dielectric(k, w, &r.electrode, t)?;
    let bark_lo = s_ff_barkhausen(k, w, &r.magnet_lo, &r.modes, t)?;
    let bark_hi = s_ff_barkhausen(k, w, &r.magnet_hi, &r.modes, t)?;
    let arm = r.trap.alpha_geom * k.e_charge * r.antenna.length / (2.0 * r.trap.z0);
    let tls = s_ff_tls(k, w, &r.tls, arm, t)?;
    let sql = sql_bound(k, chi)?;
    Ok([int, ba, imp, cross2re, ba_add + imp_add, johnson, dielectric, bark_lo, bark_hi, tls, sql])
}

fn total_of(v: &[f64; 11], include_uncertain: bool) -> f64 {
    let mut s = v[0] + v[1] + v[2] + v[3] + v[4] + v[5] + v[6];
    if include_uncertain {
        s += v[7].max(v[8]) + v[9];
    }
    s
}

fn rows_on(r: &ResolvedSystem, meta: &BudgetMeta, grid: &FrequencyGrid) -> Result<Vec<[f64; 11]>> {
    grid.points.par_iter().map(|&f| point(r, meta, f)).collect()
}

/// Total PSD on any grid, without the resonance-coverage check.
pub fn evaluate_total(config: &SystemConfig, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    grid.validate()?;
    let r = config.resolve()?;
    let meta = derived(&r)?;
    Ok(rows_on(&r, &meta, grid)?.iter().map(|row| total_of(row, r.include_uncertain)).collect())
}

/// Evaluate every channel on the grid.
///
/// Refuses grids whose span does not contain the effective axial frequency.
pub fn assemble_budget(config: &SystemConfig, grid: &FrequencyGrid) -> Result<NoiseBudget> {
    grid.validate()?;
    let r = config.resolve()?;
    let meta = derived(&r)?;
    let (first, last) = (grid.points[0], grid.points[grid.len() - 1]);
    if !(meta.f_z_eff_hz > first && meta.f_z_eff_hz < last) {
        return Err(Error::RefusesGrid(format!(
            "grid [{first:.6e}, {last:.6e}] Hz misses the axial resonance at {:.6e} Hz",
            meta.f_z_eff_hz
        )));
    }
    let rows = rows_on(&r, &meta, grid)?;
    let include = r.include_uncertain;
    let channels = CHANNEL_NAMES
        .iter()
        .enumerate()
        .map(|(j, name)| SpectrumChannel { name: name.to_string(), values: rows.iter().map(|row| row[j]).collect() })
        .collect();
    let total = SpectrumChannel { name: "total".into(), values: rows.iter().map(|row| total_of(row, include)).collect() };
    Ok(NoiseBudget { grid: grid.clone(), channels, total, include_uncertain: include, meta })
}

/// Discrete minimum of a PSD with a parabola through log-amplitude at the three lowest points.
///
/// Returns (frequency, amplitude = sqrt(PSD)).
pub fn locate_minimum(freqs: &[f64], psd: &[f64]) -> (f64, f64) {
    let i = psd
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if i == 0 || i + 1 >= psd.len() {
        return (freqs[i], psd[i].sqrt());
    }
    let (x0, x1, x2) = (freqs[i - 1], freqs[i], freqs[i + 1]);
    let (y0, y1, y2) = (0.5 * psd[i - 1].ln(), 0.5 * psd[i].ln(), 0.5 * psd[i + 1].ln());
    // divided differences, centred on x1 to keep precision for GHz offsets
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if !(curv > 0.0) {
        return (x1, psd[i].sqrt());
    }
    // y = y1 + b (x - x1) + curv (x - x1)^2 with b the slope at x1
    let b = d01 + curv * (x1 - x0);
    let dx = (-b / (2.0 * curv)).clamp(x0 - x1, x2 - x1);
    let y = y1 + b * dx + curv * dx * dx;
    (x1 + dx, y.exp())
}

/// Minimum of the total; requires a grid resolving the resonance.
pub fn find_minimum(budget: &NoiseBudget) -> Result<(f64, f64)> {
    let half = REFINED_HALF_WIDTH * rad_to_hz(budget.meta.damping.gamma_eff);
    let inside = budget.grid.count_within(budget.meta.f_z_eff_hz, half);
    if inside < 200 {
        return Err(Error::RefusesGrid(format!(
            "only {inside} grid points within +-{half:.3e} Hz of the resonance; need 200"
        )));
    }
    Ok(locate_minimum(&budget.grid.points, &budget.total.values))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BroadbandEnvelope {
    pub voltages: Vec<f64>,
    /// (f_min in Hz, S_min in N^2/Hz), one per entry of `voltages`.
    pub minima: Vec<(f64, f64)>,
    /// Voltages dropped because the trap was unstable, with the reason.
    pub skipped: Vec<(f64, String)>,
    /// Common grid, Hz.
    pub grid: Vec<f64>,
    /// Pointwise minimum of the totals on `grid`, N^2/Hz.
    pub envelope: Vec<f64>,
    /// Each voltage's total on `grid`.
    pub totals: Vec<Vec<f64>>,
}

/// `n_steps` evenly spaced voltages from `v_lo` to `v_hi`, envelope on the default log grid.
pub fn voltage_sweep(config: &SystemConfig, v_lo: f64, v_hi: f64, n_steps: usize) -> Result<BroadbandEnvelope> {
    if !(v_hi > v_lo) && !(n_steps == 1 && v_hi == v_lo) {
        return Err(Error::InvalidConfig(format!("sweep needs v_lo < v_hi, got {v_lo} and {v_hi}")));
    }
    let voltages: Vec<f64> = if n_steps <= 1 {
        vec![v_lo]
    } else {
        (0..n_steps).map(|i| v_lo + (v_hi - v_lo) * i as f64 / (n_steps - 1) as f64).collect()
    };
    let base = FrequencyGrid::log(DEFAULT_F_LO, DEFAULT_F_HI, DEFAULT_POINTS)?;
    sweep_voltages(config, &voltages, &base)
}

/// Per-voltage minima on refined grids, envelope on `base` plus every minimum frequency.
pub fn sweep_voltages(config: &SystemConfig, voltages: &[f64], base: &FrequencyGrid) -> Result<BroadbandEnvelope> {
    let mut template = config.clone();
    if !config.budget.retune_antenna {
        template.pin_antenna_length()?;
    }
    let at = |v: f64| {
        let mut c = template.clone();
        c.trap.v0_volts = v;
        c
    };
    let per_voltage: Vec<Result<(f64, f64)>> = voltages
        .par_iter()
        .map(|&v| {
            let c = at(v);
            let grid = FrequencyGrid::default_for(&c, DEFAULT_POINTS)?;
            let b = assemble_budget(&c, &grid)?;
            let (f, amp) = find_minimum(&b)?;
            Ok((f, amp * amp))
        })
        .collect();

    let mut kept = Vec::new();
    let mut minima = Vec::new();
    let mut skipped = Vec::new();
    for (&v, res) in voltages.iter().zip(per_voltage) {
        match res {
            Ok(m) => {
                kept.push(v);
                minima.push(m);
            }
            Err(e @ Error::TrapUnstable { .. }) => skipped.push((v, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(Error::NoFeasiblePoint(voltages.len()));
    }

    let mut grid = base.points.clone();
    grid.extend(minima.iter().map(|m| m.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let common = FrequencyGrid { points: grid, kind: base.kind };

    let totals: Vec<Vec<f64>> = kept
        .par_iter()
        .map(|&v| assemble_budget(&at(v), &common).map(|b| b.total.values))
        .collect::<Result<_>>()?;
    let envelope = (0..common.len())
        .map(|i| totals.iter().map(|t| t[i]).fold(f64::INFINITY, f64::min))
        .collect();
    Ok(BroadbandEnvelope { voltages: kept, minima, skipped, grid: common.points, envelope, totals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design_budget(points: usize) -> NoiseBudget {
        let c = SystemConfig::design_point();
        assemble_budget(&c, &FrequencyGrid::default_for(&c, points).unwrap()).unwrap()
    }

    #[test]
    fn total_is_the_sum_of_certain_channels() {
        let b = design_budget(1024);
        let names = ["int", "ba", "imp", "cross2re", "read_add", "johnson", "dielectric"];
        for i in 0..b.grid.len() {
            let sum: f64 = names.iter().map(|n| b.channel(n).unwrap()[i]).sum();
            assert!((sum / b.total.values[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uncertain_channels_add_the_larger_magnet_band() {
        let mut c = SystemConfig::design_point();
        c.budget.include_uncertain = true;
        let grid = FrequencyGrid::log(1e9, 20e9, 300).unwrap();
        let b = assemble_budget(&c, &grid).unwrap();
        let plain = evaluate_total(&SystemConfig::design_point(), &grid).unwrap();
        for i in 0..grid.len() {
            let extra = b.channel("barkhausen_lo").unwrap()[i].max(b.channel("barkhausen_hi").unwrap()[i])
                + b.channel("tls").unwrap()[i];
            assert!(((plain[i] + extra) / b.total.values[i] - 1.0).abs() < 1e-12);
        }
        assert!(b.include_uncertain);
    }

    #[test]
    fn grids_are_increasing_and_refined_grid_keeps_its_window() {
        let g = FrequencyGrid::refined(1e9, 20e9, 1000, 5e9, 1e3, 300).unwrap();
        assert!(g.points.windows(2).all(|w| w[1] > w[0]));
        assert!(g.count_within(5e9, 1e3) >= 300);
        assert!(FrequencyGrid::linear(2.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::log(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn minimum_needs_a_resolved_resonance() {
        let c = SystemConfig::design_point();
        let coarse = assemble_budget(&c, &FrequencyGrid::log(1e9, 20e9, 4096).unwrap()).unwrap();
        assert!(matches!(find_minimum(&coarse), Err(Error::RefusesGrid(_))));
        let off = FrequencyGrid::linear(10e9, 20e9, 100).unwrap();
        assert!(matches!(assemble_budget(&c, &off), Err(Error::RefusesGrid(_))));
        assert!(evaluate_total(&c, &off).is_ok());
    }

    #[test]
    fn refinement_converges() {
        let (f1, a1) = find_minimum(&design_budget(2048)).unwrap();
        let (f2, a2) = find_minimum(&design_budget(8192)).unwrap();
        assert!((a1 / a2 - 1.0).abs() < 1e-3, "{a1} {a2}");
        let gamma = rad_to_hz(design_budget(2048).meta.damping.gamma_eff);
        assert!((f1 - f2).abs() < gamma);
    }

    #[test]
    fn parabola_recovers_vertex() {
        let f: Vec<f64> = (0..11).map(|i| 1.0 + 0.1 * i as f64).collect();
        let psd: Vec<f64> = f.iter().map(|x| (2.0 * (x - 1.537f64).powi(2)).exp() * 4.0).collect();
        let (x, amp) = locate_minimum(&f, &psd);
        assert!((x - 1.537).abs() < 1e-12);
        assert!((amp - 2.0).abs() < 1e-12);
        // edges are returned unrefined
        assert_eq!(locate_minimum(&f, &f.clone()), (1.0, 1.0));
    }

    #[test]
    fn envelope_is_pointwise_minimum() {
        let env = voltage_sweep(&SystemConfig::design_point(), 15.0, 25.0, 3).unwrap();
        assert_eq!(env.voltages.len(), 3);
        for i in 0..env.grid.len() {
            let m = env.totals.iter().map(|t| t[i]).fold(f64::INFINITY, f64::min);
            assert_eq!(env.envelope[i], m);
        }
        // every minimum frequency is a grid point
        for (f, _) in &env.minima {
            assert!(env.grid.binary_search_by(|x| x.total_cmp(f)).is_ok());
        }
        let hot = voltage_sweep(&SystemConfig::design_point(), 20.0, 200.0, 3).unwrap();
        assert_eq!(hot.skipped.len(), 2);
    }
}
