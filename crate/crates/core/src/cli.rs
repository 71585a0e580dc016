//! Command-line front end: `budget`, `sweep`, `optimize`, `validate` and `params`.
//!
//! Data goes to `--out` or standard output, diagnostics to standard error.
//! Exit codes: 0 success, 1 usage or config error, 2 physics error, 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::budget::{
    assemble_budget, derived, find_minimum, voltage_sweep, FrequencyGrid, NoiseBudget, CHANNEL_NAMES, DEFAULT_F_HI,
    DEFAULT_F_LO, DEFAULT_POINTS,
};
use crate::config::SystemConfig;
use crate::constants::rad_to_hz;
use crate::error::{Error, Result};
use crate::langevin::{analytic_output, compare_to_analytic, simulate, ComparisonReport, SimConfig};
use crate::optimize::{optimize, sensitivity_table, Objective, ParamSpace, Scale};

/// Caps the worker threads used by the parallel engines.
pub const THREADS_ENV: &str = "NOISE_BUDGET_THREADS";

#[derive(Parser, Debug)]
#[command(name = "force-budget", version, about = "Force-noise budget of a trapped electron read out through a microwave cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate every noise channel on a frequency grid.
    Budget(BudgetArgs),
    /// Sweep the trap voltage and report each minimum.
    Sweep(SweepArgs),
    /// Search design parameters for the lowest noise floor.
    Optimize(OptimizeArgs),
    /// Check the analytic readout chain against the time-domain simulation.
    Validate(ValidateArgs),
    /// Print derived frequencies, coupling and damping rates.
    Params(ParamsArgs),
}

#[derive(Args, Debug)]
struct Io {
    /// Sectioned key = value file, or JSON by extension. Defaults to the bundled design point.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum GridArg {
    Lin,
    Log,
    Refined,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, value_enum, default_value_t = GridArg::Refined)]
    grid: GridArg,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Add the Barkhausen and TLS channels to the total.
    #[arg(long)]
    include_uncertain: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, default_value_t = 10.0)]
    vlo: f64,
    #[arg(long, default_value_t = 50.0)]
    vhi: f64,
    #[arg(long, default_value_t = 21)]
    vsteps: usize,
    #[arg(long)]
    include_uncertain: bool,
    /// Also write the broadband envelope as CSV here.
    #[arg(long)]
    envelope: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[command(flatten)]
    io: Io,
    /// NAME:LO:HI or NAME:LO:HI:log; repeatable. Defaults to width, external Q and voltage.
    #[arg(long = "param")]
    params: Vec<String>,
    /// `floor`, or `band:F_LO_HZ:F_HI_HZ`.
    #[arg(long, default_value = "floor")]
    objective: String,
    #[arg(long, default_value_t = 200)]
    evals: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a one-at-a-time scan with this many points per parameter instead of optimizing.
    #[arg(long)]
    sensitivity: Option<usize>,
    #[arg(long)]
    include_uncertain: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    trajectories: usize,
    /// Recorded steps per trajectory.
    #[arg(long, default_value_t = 1 << 20)]
    steps: usize,
    /// Allowed fractional PSD deviation across the half-power band.
    #[arg(long, default_value_t = 0.1)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct ParamsArgs {
    #[command(flatten)]
    io: Io,
}

/// Parse `argv` (program name first) and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output and diagnostic streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Err(msg) = limit_threads() {
        let _ = writeln!(err, "error: {msg}");
        return 1;
    }
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn limit_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    // a pool built by an earlier call in the same process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Budget(a) => cmd_budget(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Optimize(a) => cmd_optimize(a, out, err),
        Command::Validate(a) => cmd_validate(a, out, err),
        Command::Params(a) => cmd_params(a, out),
    }
}

fn load(io: &Io) -> Result<SystemConfig> {
    match &io.config {
        Some(p) => SystemConfig::load(p),
        None => Ok(SystemConfig::design_point()),
    }
}

fn emit(path: &Option<PathBuf>, out: &mut dyn Write, text: &str) -> Result<()> {
    let res = match path {
        Some(p) => std::fs::write(p, text).map_err(|e| (p.display().to_string(), e)),
        None => out.write_all(text.as_bytes()).map_err(|e| ("standard output".to_string(), e)),
    };
    res.map_err(|(dest, e)| Error::InvalidConfig(format!("cannot write {dest}: {e}")))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Amplitude spectral density; the signed correlation channel keeps its sign.
pub fn amplitude(psd: f64) -> f64 {
    psd.signum() * psd.abs().sqrt()
}

/// Fixed-column CSV of amplitudes in N/sqrt(Hz); shortest round-trip float formatting.
pub fn budget_csv(b: &NoiseBudget) -> String {
    let mut s = String::from("frequency_hz,total");
    for name in CHANNEL_NAMES {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for (i, f) in b.grid.points.iter().enumerate() {
        s.push_str(&format!("{f:e},{:e}", amplitude(b.total.values[i])));
        for ch in &b.channels {
            s.push_str(&format!(",{:e}", amplitude(ch.values[i])));
        }
        s.push('\n');
    }
    s
}

fn cmd_budget(a: BudgetArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut config = load(&a.io)?;
    if a.include_uncertain {
        config.budget.include_uncertain = true;
    }
    let grid = match a.grid {
        GridArg::Lin => FrequencyGrid::linear(DEFAULT_F_LO, DEFAULT_F_HI, a.points)?,
        GridArg::Log => FrequencyGrid::log(DEFAULT_F_LO, DEFAULT_F_HI, a.points)?,
        GridArg::Refined => FrequencyGrid::default_for(&config, a.points)?,
    };
    let b = assemble_budget(&config, &grid)?;
    match find_minimum(&b) {
        Ok((f, amp)) => {
            let _ = writeln!(err, "minimum {amp:.4e} N/sqrt(Hz) at {:.6} GHz", f * 1e-9);
        }
        Err(e) => {
            let _ = writeln!(err, "note: minimum not located ({e}); use --grid refined");
        }
    }
    let text = match a.io.format {
        Format::Csv => budget_csv(&b),
        Format::Json => json(&b),
    };
    emit(&a.io.out, out, &text)?;
    Ok(0)
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut config = load(&a.io)?;
    if a.include_uncertain {
        config.budget.include_uncertain = true;
    }
    let env = voltage_sweep(&config, a.vlo, a.vhi, a.vsteps)?;
    for (v, why) in &env.skipped {
        let _ = writeln!(err, "skipped {v} V: {why}");
    }
    if let Some(p) = &a.envelope {
        let mut s = String::from("frequency_hz,envelope\n");
        for (f, e) in env.grid.iter().zip(&env.envelope) {
            s.push_str(&format!("{f:e},{:e}\n", amplitude(*e)));
        }
        emit(&Some(p.clone()), out, &s)?;
    }
    let text = match a.io.format {
        Format::Csv => {
            let mut s = String::from("v0_volts,f_min_hz,amplitude_min\n");
            for (v, (f, psd)) in env.voltages.iter().zip(&env.minima) {
                s.push_str(&format!("{v:e},{f:e},{:e}\n", amplitude(*psd)));
            }
            s
        }
        Format::Json => json(&env),
    };
    emit(&a.io.out, out, &text)?;
    Ok(0)
}

/// Parse `NAME:LO:HI[:log|:lin]`.
pub fn parse_param(spec: &str) -> Result<(String, f64, f64, Scale)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidConfig(format!("parameter `{spec}` should be NAME:LO:HI or NAME:LO:HI:log"));
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let lo: f64 = parts[1].parse().map_err(|_| bad())?;
    let hi: f64 = parts[2].parse().map_err(|_| bad())?;
    let scale = match parts.get(3) {
        None | Some(&"lin") => Scale::Linear,
        Some(&"log") => Scale::Log,
        Some(_) => return Err(bad()),
    };
    Ok((parts[0].to_string(), lo, hi, scale))
}

/// Parse `floor` or `band:F_LO:F_HI`.
pub fn parse_objective(spec: &str) -> Result<Objective> {
    let bad = || Error::InvalidConfig(format!("objective `{spec}` should be `floor` or `band:F_LO_HZ:F_HI_HZ`"));
    if spec == "floor" {
        return Ok(Objective::MinFloor);
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 || parts[0] != "band" {
        return Err(bad());
    }
    let f_lo: f64 = parts[1].parse().map_err(|_| bad())?;
    let f_hi: f64 = parts[2].parse().map_err(|_| bad())?;
    if !(f_lo > 0.0 && f_hi > f_lo) {
        return Err(bad());
    }
    Ok(Objective::BandMin { f_lo, f_hi })
}

fn cmd_optimize(a: OptimizeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut config = load(&a.io)?;
    if a.include_uncertain {
        config.budget.include_uncertain = true;
    }
    let mut space = ParamSpace::new();
    if a.params.is_empty() {
        space = space
            .with("antenna.width_m", 0.01, 0.2, Scale::Log)?
            .with("cavity.q_ext", 1e2, 1e4, Scale::Log)?
            .with("trap.v0_volts", 10.0, 40.0, Scale::Linear)?;
    }
    for p in &a.params {
        let (name, lo, hi, scale) = parse_param(p)?;
        space = space.with(&name, lo, hi, scale)?;
    }
    if let Some(n) = a.sensitivity {
        let rows = sensitivity_table(&config, &space, n)?;
        let text = match a.io.format {
            Format::Csv => {
                let mut s = String::from("param,value,floor\n");
                for r in &rows {
                    s.push_str(&format!("{},{:e},{:e}\n", r.param, r.value, r.floor));
                }
                s
            }
            Format::Json => json(&rows),
        };
        emit(&a.io.out, out, &text)?;
        return Ok(0);
    }
    let objective = parse_objective(&a.objective)?;
    let res = optimize(&config, &space, objective, a.evals, a.seed)?;
    let _ = writeln!(err, "best {:.4e} N/sqrt(Hz) after {} evaluations", res.best_objective, res.evaluations);
    for (name, v) in &res.best_params {
        let _ = writeln!(err, "  {name} = {v:e}");
    }
    let text = match a.io.format {
        Format::Csv => {
            let mut s = String::from("evaluation,best_objective\n");
            for (i, v) in &res.trace {
                s.push_str(&format!("{i},{v:e}\n"));
            }
            s
        }
        Format::Json => json(&res),
    };
    emit(&a.io.out, out, &text)?;
    Ok(0)
}

/// Run the toy-scale oracle comparison behind `validate`.
pub fn validation_report(seed: u64, trajectories: usize, steps: usize, tolerance: f64) -> Result<ComparisonReport> {
    let mut sim = SimConfig::toy();
    sim.seed = seed;
    sim.n_trajectories = trajectories;
    sim.n_steps = steps;
    sim.segment_len = sim.segment_len.min(steps);
    let r = simulate(&sim)?;
    let analytic = analytic_output(&sim, &r.freqs)?;
    compare_to_analytic(&r, &analytic, tolerance, 3.0)
}

fn cmd_validate(a: ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let report = validation_report(a.seed, a.trajectories, a.steps, a.tolerance)?;
    emit(&a.out, out, &json(&report))?;
    let _ = writeln!(
        err,
        "center {:.2} sigma, linewidth {:.2} sigma, PSD deviation {:.2}%: {}",
        report.center.sigmas,
        report.linewidth.sigmas,
        100.0 * report.max_deviation,
        if report.pass { "pass" } else { "FAIL" }
    );
    Ok(if report.pass { 0 } else { 3 })
}

fn cmd_params(a: ParamsArgs, out: &mut dyn Write) -> Result<i32> {
    let config = load(&a.io)?;
    let r = config.resolve()?;
    let m = derived(&r)?;
    let d = &m.damping;
    let rows: Vec<(&str, f64, &str)> = vec![
        ("f_z", rad_to_hz(m.modes.omega_z), "Hz"),
        ("f_c", rad_to_hz(m.modes.omega_c), "Hz"),
        ("f_plus", rad_to_hz(m.modes.omega_plus), "Hz"),
        ("f_minus", rad_to_hz(m.modes.omega_minus), "Hz"),
        ("f_z_eff", m.f_z_eff_hz, "Hz"),
        ("omega_ba", m.omega_ba, "rad/s"),
        ("coupling_g", m.coupling_g, "Hz/m"),
        ("antenna_length", r.antenna.length, "m"),
        ("kappa_in", m.kappa_in, "rad/s"),
        ("kappa_add", m.kappa_add, "rad/s"),
        ("kappa", r.cavity.kappa(), "rad/s"),
        ("q_loaded", r.cavity.loaded_q(), "1"),
        ("gamma_larmor", d.gamma_larmor, "rad/s"),
        ("gamma_antenna", d.gamma_antenna, "rad/s"),
        ("gamma_dephase", d.gamma_dephase, "rad/s"),
        ("gamma_ba", d.gamma_ba, "rad/s"),
        ("gamma_eff", d.gamma_eff, "rad/s"),
        ("z_zero_point", m.modes.z_zp, "m"),
    ];
    let text = match a.io.format {
        Format::Csv => {
            let mut s = String::from("quantity,value,unit\n");
            for (name, v, unit) in &rows {
                s.push_str(&format!("{name},{v:e},{unit}\n"));
            }
            s
        }
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> =
                rows.iter().map(|(n, v, _)| (n.to_string(), serde_json::json!(v))).collect();
            json(&map)
        }
    };
    emit(&a.io.out, out, &text)?;
    Ok(0)
}
