//! Derivative-free search over design parameters.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::{assemble_budget, evaluate_total, find_minimum, FrequencyGrid};
use crate::config::{AntennaLength, SystemConfig};
use crate::error::{Error, Result};
use crate::simplex::{minimize, SimplexOptions};

/// Grid size used for objective evaluations; the minimum only needs the resonance window resolved.
pub const OBJECTIVE_POINTS: usize = 1024;
const RESTARTS: usize = 3;
const SIMPLEX_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamAxis {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub scale: Scale,
}

impl ParamAxis {
    fn from_unit(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self.scale {
            Scale::Linear => self.lower + (self.upper - self.lower) * u,
            Scale::Log => (self.lower.ln() + (self.upper.ln() - self.lower.ln()) * u).exp(),
        }
    }
}

/// Parameter names understood by [`set_param`].
pub const PARAM_NAMES: [&str; 10] = [
    "trap.v0_volts",
    "trap.b0_tesla",
    "trap.d_m",
    "cavity.f_k_hz",
    "cavity.q_ext",
    "cavity.q_int",
    "antenna.width_m",
    "antenna.thickness_m",
    "antenna.length_m",
    "temperature_k",
];

/// Write one named design parameter into a config.
///
/// `trap.d_m` replaces any z0/rho0 geometry. Moving `cavity.f_k_hz` keeps an on-resonance drive on resonance.
pub fn set_param(c: &mut SystemConfig, name: &str, v: f64) -> Result<()> {
    match name {
        "trap.v0_volts" => c.trap.v0_volts = v,
        "trap.b0_tesla" => c.trap.b0_tesla = v,
        "trap.d_m" => {
            c.trap.d_m = Some(v);
            c.trap.z0_m = None;
            c.trap.rho0_m = None;
        }
        "cavity.f_k_hz" => {
            if c.cavity.f_in_hz == Some(c.cavity.f_k_hz) {
                c.cavity.f_in_hz = Some(v);
            }
            c.cavity.f_k_hz = v;
        }
        "cavity.q_ext" => c.cavity.q_ext = v,
        "cavity.q_int" => c.cavity.q_int = v,
        "antenna.width_m" => c.antenna.width_m = v,
        "antenna.thickness_m" => c.antenna.thickness_m = v,
        "antenna.length_m" => c.antenna.length_m = AntennaLength::Meters(v),
        "temperature_k" => {
            c.temperature_k = Some(v);
            c.trap.temperature_k = None;
            c.cavity.temperature_k = None;
            c.magnet.temperature_k = None;
        }
        _ => return Err(Error::InvalidConfig(format!("unknown design parameter `{name}`"))),
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Default)]
pub struct ParamSpace {
    pub axes: Vec<ParamAxis>,
}

impl ParamSpace {
    pub fn new() -> Self {
        ParamSpace::default()
    }

    /// Add an axis. Equal bounds pin the parameter.
    pub fn with(mut self, name: &str, lower: f64, upper: f64, scale: Scale) -> Result<Self> {
        if !PARAM_NAMES.contains(&name) {
            return Err(Error::InvalidConfig(format!("unknown design parameter `{name}`")));
        }
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(Error::InvalidConfig(format!("bounds for `{name}` must be finite with lower <= upper")));
        }
        if scale == Scale::Log && lower <= 0.0 {
            return Err(Error::InvalidConfig(format!("log axis `{name}` needs positive bounds")));
        }
        self.axes.push(ParamAxis { name: name.into(), lower, upper, scale });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Config at a point of the unit cube.
    pub fn config_at(&self, base: &SystemConfig, u: &[f64]) -> Result<SystemConfig> {
        let mut c = base.clone();
        for (axis, &ui) in self.axes.iter().zip(u) {
            set_param(&mut c, &axis.name, axis.from_unit(ui))?;
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Objective {
    /// Lowest amplitude anywhere, N/sqrt(Hz).
    MinFloor,
    /// RMS amplitude averaged over a band, N/sqrt(Hz).
    BandMin { f_lo: f64, f_hi: f64 },
}

impl Objective {
    pub fn evaluate(&self, c: &SystemConfig) -> Result<f64> {
        match *self {
            Objective::MinFloor => {
                let grid = FrequencyGrid::default_for(c, OBJECTIVE_POINTS)?;
                let b = assemble_budget(c, &grid)?;
                Ok(find_minimum(&b)?.1)
            }
            Objective::BandMin { f_lo, f_hi } => {
                let grid = FrequencyGrid::linear(f_lo, f_hi, 512)?;
                let s = evaluate_total(c, &grid)?;
                let h = grid.points[1] - grid.points[0];
                let area: f64 = s.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).sum();
                Ok((area / (f_hi - f_lo)).sqrt())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptResult {
    pub best_config: SystemConfig,
    pub best_params: Vec<(String, f64)>,
    pub best_objective: f64,
    /// (evaluation index, best objective so far).
    pub trace: Vec<(usize, f64)>,
    pub evaluations: usize,
}

pub fn optimize(
    config: &SystemConfig,
    space: &ParamSpace,
    objective: Objective,
    budget_evals: usize,
    seed: u64,
) -> Result<OptResult> {
    optimize_with(config, space, |c| objective.evaluate(c), budget_evals, seed)
}

/// Unstable traps and resonances outside the grid score +inf; other failures abort.
fn score<F>(f: &F, c: Result<SystemConfig>) -> Result<f64>
where
    F: Fn(&SystemConfig) -> Result<f64>,
{
    match c.and_then(|c| f(&c)) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) | Err(Error::TrapUnstable { .. }) | Err(Error::RefusesGrid(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

struct Search<'a, F> {
    base: &'a SystemConfig,
    space: &'a ParamSpace,
    f: F,
    evals: usize,
    limit: usize,
    best: (f64, Vec<f64>),
    trace: Vec<(usize, f64)>,
}

impl<F> Search<'_, F>
where
    F: Fn(&SystemConfig) -> Result<f64> + Sync,
{
    fn record(&mut self, u: &[f64], v: f64) {
        self.evals += 1;
        if v < self.best.0 {
            self.best = (v, u.to_vec());
        }
        self.trace.push((self.evals, self.best.0));
    }

    fn eval(&mut self, u: &[f64]) -> Result<f64> {
        let v = score(&self.f, self.space.config_at(self.base, u))?;
        self.record(u, v);
        Ok(v)
    }

    fn eval_batch(&mut self, pts: &[Vec<f64>]) -> Result<Vec<f64>> {
        let vals: Vec<f64> = pts
            .par_iter()
            .map(|u| score(&self.f, self.space.config_at(self.base, u)))
            .collect::<Result<_>>()?;
        for (u, &v) in pts.iter().zip(&vals) {
            self.record(u, v);
        }
        Ok(vals)
    }

    /// Bounded downhill simplex in the unit cube.
    fn simplex(&mut self, start: &[f64], f_start: f64, limit: usize) -> Result<()> {
        let opts = SimplexOptions {
            step: vec![0.1; start.len()],
            tol: SIMPLEX_TOL,
            max_evals: limit.min(self.limit.saturating_sub(self.evals)),
            bounds: Some((0.0, 1.0)),
        };
        minimize(|u| self.eval(u), start, Some(f_start), &opts)?;
        Ok(())
    }
}

/// Latin-hypercube seeding, then simplex refinement from the best seeds.
///
/// `objective` is any config-to-score map; [`optimize`] plugs in a budget objective.
pub fn optimize_with<F>(
    config: &SystemConfig,
    space: &ParamSpace,
    objective: F,
    budget_evals: usize,
    seed: u64,
) -> Result<OptResult>
where
    F: Fn(&SystemConfig) -> Result<f64> + Sync,
{
    if budget_evals < 20 {
        return Err(Error::InvalidConfig(format!("optimizer needs at least 20 evaluations, got {budget_evals}")));
    }
    let n = space.dim();
    let mut search = Search {
        base: config,
        space,
        f: objective,
        evals: 0,
        limit: budget_evals,
        best: (f64::INFINITY, vec![0.5; n]),
        trace: Vec::new(),
    };

    let n_seed = (budget_evals / 2).max(2 * n + 2).min(budget_evals);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds = vec![vec![0.0; n]; n_seed];
    for j in 0..n {
        let mut strata: Vec<usize> = (0..n_seed).collect();
        strata.shuffle(&mut rng);
        for (i, s) in strata.into_iter().enumerate() {
            seeds[i][j] = (s as f64 + rng.gen::<f64>()) / n_seed as f64;
        }
    }
    let seed_vals = search.eval_batch(&seeds)?;
    if seed_vals.iter().all(|v| !v.is_finite()) {
        return Err(Error::NoFeasiblePoint(n_seed));
    }

    if n > 0 {
        let mut ranked: Vec<usize> = (0..n_seed).filter(|&i| seed_vals[i].is_finite()).collect();
        ranked.sort_by(|&a, &b| seed_vals[a].total_cmp(&seed_vals[b]).then(a.cmp(&b)));
        let starts: Vec<usize> = ranked.into_iter().take(RESTARTS).collect();
        for (r, &i) in starts.iter().enumerate() {
            let left = search.limit.saturating_sub(search.evals);
            let share = left / (starts.len() - r);
            if share == 0 {
                break;
            }
            search.simplex(&seeds[i], seed_vals[i], share)?;
        }
    }

    let (best_objective, best_u) = search.best.clone();
    let best_config = space.config_at(config, &best_u)?;
    let best_params = space.axes.iter().zip(&best_u).map(|(a, &u)| (a.name.clone(), a.from_unit(u))).collect();
    Ok(OptResult { best_config, best_params, best_objective, trace: search.trace, evaluations: search.evals })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub param: String,
    pub value: f64,
    /// Floor amplitude in N/sqrt(Hz); infinite where the trap is unstable.
    pub floor: f64,
}

/// One-at-a-time scans of each axis with the others held at the base config.
pub fn sensitivity_table(config: &SystemConfig, space: &ParamSpace, n_per_axis: usize) -> Result<Vec<SensitivityRow>> {
    if n_per_axis < 3 {
        return Err(Error::InvalidConfig(format!("sensitivity scan needs >= 3 points per axis, got {n_per_axis}")));
    }
    let mut jobs = Vec::new();
    for axis in &space.axes {
        let count = if axis.lower == axis.upper { 1 } else { n_per_axis };
        for i in 0..count {
            let u = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            jobs.push((axis.name.clone(), axis.from_unit(u)));
        }
    }
    let floors: Vec<f64> = jobs
        .par_iter()
        .map(|(name, v)| {
            let mut c = config.clone();
            set_param(&mut c, name, *v)?;
            score(&|c: &SystemConfig| Objective::MinFloor.evaluate(c), Ok(c))
        })
        .collect::<Result<_>>()?;
    Ok(jobs.into_iter().zip(floors).map(|((param, value), floor)| SensitivityRow { param, value, floor }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bowl(c: &SystemConfig) -> Result<f64> {
        let v = (c.trap.v0_volts - 23.0) / 30.0;
        let w = (c.antenna.width_m / 0.03).ln();
        Ok(1.0 + v * v + 0.5 * w * w)
    }

    fn space() -> ParamSpace {
        ParamSpace::new()
            .with("trap.v0_volts", 10.0, 40.0, Scale::Linear)
            .unwrap()
            .with("antenna.width_m", 0.01, 0.2, Scale::Log)
            .unwrap()
    }

    #[test]
    fn finds_the_bottom_of_a_bowl() {
        let r = optimize_with(&SystemConfig::design_point(), &space(), bowl, 200, 7).unwrap();
        assert!(r.evaluations <= 200);
        assert!((r.best_objective - 1.0).abs() < 1e-6, "{}", r.best_objective);
        assert!((r.best_params[0].1 - 23.0).abs() < 0.1);
        assert!((r.best_params[1].1 / 0.03 - 1.0).abs() < 1e-2);
        assert_eq!(bowl(&r.best_config).unwrap(), r.best_objective);
    }

    #[test]
    fn trace_is_monotone_and_seeded() {
        let a = optimize_with(&SystemConfig::design_point(), &space(), bowl, 60, 3).unwrap();
        let b = optimize_with(&SystemConfig::design_point(), &space(), bowl, 60, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), a.evaluations);
        assert!(a.trace.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 == w[0].0 + 1));
        assert_eq!(a.trace.last().unwrap().1, a.best_objective);
    }

    #[test]
    fn unstable_everywhere_is_infeasible() {
        let s = ParamSpace::new().with("trap.v0_volts", 500.0, 900.0, Scale::Linear).unwrap();
        let r = optimize(&SystemConfig::design_point(), &s, Objective::MinFloor, 20, 0);
        assert!(matches!(r, Err(Error::NoFeasiblePoint(_))));
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(ParamSpace::new().with("trap.colour", 0.0, 1.0, Scale::Linear).is_err());
        assert!(ParamSpace::new().with("trap.v0_volts", 2.0, 1.0, Scale::Linear).is_err());
        assert!(ParamSpace::new().with("cavity.q_ext", 0.0, 1.0, Scale::Log).is_err());
        assert!(optimize_with(&SystemConfig::design_point(), &space(), bowl, 19, 0).is_err());
    }

    #[test]
    fn set_param_keeps_drive_on_resonance() {
        let mut c = SystemConfig::design_point();
        set_param(&mut c, "cavity.f_k_hz", 6e9).unwrap();
        assert_eq!(c.cavity.f_in_hz, Some(6e9));
        c.cavity.f_in_hz = Some(6.1e9);
        set_param(&mut c, "cavity.f_k_hz", 7e9).unwrap();
        assert_eq!(c.cavity.f_in_hz, Some(6.1e9));
        c.trap.temperature_k = Some(1.0);
        set_param(&mut c, "temperature_k", 0.1).unwrap();
        assert_eq!(c.resolve().unwrap().trap.temperature, 0.1);
    }

    #[test]
    fn width_scan_has_an_interior_optimum_near_design() {
        let s = ParamSpace::new().with("antenna.width_m", 0.01, 0.2, Scale::Log).unwrap();
        let r = optimize(&SystemConfig::design_point(), &s, Objective::MinFloor, 40, 1).unwrap();
        let w = r.best_params[0].1;
        assert!(w > 0.01 && w < 0.2, "{w}");
        let design = Objective::MinFloor.evaluate(&SystemConfig::design_point()).unwrap();
        assert!(r.best_objective <= design * (1.0 + 1e-9));
        assert!(design < 2.0 * r.best_objective);
    }

    #[test]
    fn sensitivity_rows() {
        let s = ParamSpace::new()
            .with("cavity.q_ext", 1e2, 1e4, Scale::Log)
            .unwrap()
            .with("trap.b0_tesla", 0.5, 0.5, Scale::Linear)
            .unwrap();
        let rows = sensitivity_table(&SystemConfig::design_point(), &s, 3).unwrap();
        assert_eq!(rows.len(), 4);
        assert!((rows[1].value - 1e3).abs() < 1e-9);
        // the design Q_ext beats both ends of its range
        assert!(rows[1].floor < rows[0].floor && rows[1].floor < rows[2].floor);
        assert_eq!(rows[3].floor, Objective::MinFloor.evaluate(&SystemConfig::design_point()).unwrap());
        assert!(sensitivity_table(&SystemConfig::design_point(), &s, 2).is_err());
    }
}
