//! Stochastic integration of the linearized electron-cavity equations.
//!
//! Units are natural: hbar = m = k_B = 1, frequencies in units of a reference rate.
//! Baths are classical-equivalent white noise with symmetrized level n + 1/2,
//! taken at the frequency where each bath matters most (the axial resonance).

use nalgebra::{Matrix4, SMatrix, SymmetricEigen, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_resonance, LineFit};
use super::welch::Welch;
use crate::constants::PhysConstants;
use crate::error::{Error, Result};
use crate::physics::{dynamical_backaction, occupation_plus_half, CavityConfig};

/// Error bars come from the scatter of this many independent trajectory batches.
pub const BATCHES: usize = 8;
const MAX_STEP_PHASE: f64 = 0.1;
const CHECK_EVERY: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Exact transition matrix in the laboratory frame.
    Lab,
    /// Cavity envelope rotating at the drive, stepped with the implicit midpoint rule.
    Rotating,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub omega_z: f64,
    pub omega_k: f64,
    pub omega_in: f64,
    pub kappa_in: f64,
    pub kappa_add: f64,
    /// Intrinsic axial damping.
    pub gamma: f64,
    /// Linearized coupling G.
    pub coupling: f64,
    pub t_mech: f64,
    pub t_cav: f64,
    /// Homodyne angle of the recorded quadrature.
    pub theta: f64,
    pub dt: f64,
    /// Recorded steps per trajectory, after burn-in.
    pub n_steps: usize,
    /// Welch segment length in samples.
    pub segment_len: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    pub frame: Frame,
}

impl SimConfig {
    /// Red-detuned toy system with the cavity damping equal to the intrinsic damping.
    ///
    /// The cavity is much broader than the mechanical line, so the peak stays close to a
    /// pure oscillator line and the first-order shift and damping describe it well.
    pub fn toy() -> Self {
        let mut c = SimConfig {
            omega_z: 1.0,
            omega_k: 0.7,
            omega_in: 0.7,
            kappa_in: 4.0,
            kappa_add: 0.0,
            gamma: 0.005,
            coupling: 0.0,
            t_mech: 2.0,
            t_cav: 0.0,
            theta: std::f64::consts::FRAC_PI_2,
            dt: 0.05,
            n_steps: 1 << 20,
            segment_len: 1 << 18,
            n_trajectories: 64,
            seed: 1,
            frame: Frame::Lab,
        };
        c.coupling = c.coupling_for_damping(c.gamma);
        c
    }

    /// Coupling at which the cavity adds `damping` to the axial linewidth.
    pub fn coupling_for_damping(&self, damping: f64) -> f64 {
        let probe = SimConfig { coupling: 1.0, ..self.clone() };
        let (_, per_g2) = dynamical_backaction(&PhysConstants::natural(), self.omega_z, &probe.cavity(), 1.0, 1.0);
        (damping / per_g2).sqrt()
    }

    /// Largest frequency the integrator has to resolve in the chosen frame.
    pub fn max_frequency(&self) -> f64 {
        match self.frame {
            Frame::Lab => self.omega_z.max(self.omega_k),
            Frame::Rotating => self.omega_z.max((self.omega_k - self.omega_in).abs()).max(self.omega_in + self.omega_z),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !(pos(self.omega_z) && pos(self.omega_k) && pos(self.kappa_in) && pos(self.gamma)) {
            return Err(Error::InvalidConfig("omega_z, omega_k, kappa_in and gamma must be positive".into()));
        }
        if !(nonneg(self.omega_in) && nonneg(self.kappa_add) && nonneg(self.coupling)) {
            return Err(Error::InvalidConfig("omega_in, kappa_add and coupling must be >= 0".into()));
        }
        if !(nonneg(self.t_mech) && nonneg(self.t_cav) && self.theta.is_finite()) {
            return Err(Error::InvalidConfig("temperatures must be >= 0 and theta finite".into()));
        }
        if self.t_cav > 0.0 && self.omega_in == self.omega_z {
            return Err(Error::InvalidConfig("a warm cavity needs the drive off the axial frequency".into()));
        }
        if self.n_trajectories < BATCHES {
            return Err(Error::InvalidConfig(format!("need at least {BATCHES} trajectories, got {}", self.n_trajectories)));
        }
        if self.segment_len < 64 || self.n_steps < self.segment_len {
            return Err(Error::InvalidConfig(format!(
                "segment length {} must be >= 64 and fit in {} steps",
                self.segment_len, self.n_steps
            )));
        }
        if !pos(self.dt) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        let phase = self.dt * self.max_frequency();
        if phase >= MAX_STEP_PHASE {
            return Err(Error::StepTooLarge(phase));
        }
        Ok(())
    }

    /// Cavity description in the analytic model's terms.
    pub fn cavity(&self) -> CavityConfig {
        CavityConfig {
            omega_k: self.omega_k,
            q_int: if self.kappa_add > 0.0 { self.omega_k / (2.0 * self.kappa_add) } else { f64::INFINITY },
            q_ext: self.omega_k / (2.0 * self.kappa_in),
            dims: [1.0; 3],
            omega_in: self.omega_in,
            theta_lo: self.theta,
            temperature: self.t_cav,
        }
    }

    /// Resonance center and linewidth the analytic chain predicts.
    pub fn analytic_line(&self) -> (f64, f64) {
        let (shift, damping) =
            dynamical_backaction(&PhysConstants::natural(), self.omega_z, &self.cavity(), self.coupling, 1.0);
        (self.omega_z + shift, self.gamma + damping)
    }

    fn burn_in(&self) -> usize {
        (10.0 / (self.gamma * self.dt)).ceil() as usize
    }

    fn noise_levels(&self) -> NoiseLevels {
        let k = PhysConstants::natural();
        NoiseLevels {
            force: 2.0 * self.gamma * self.omega_z * occupation_plus_half(&k, self.omega_z, self.t_mech),
            input: occupation_plus_half(&k, self.omega_z - self.omega_in, self.t_cav),
            loss: occupation_plus_half(&k, self.omega_z, self.t_cav),
        }
    }
}

/// White-noise intensities: force, and symmetrized occupations of the two cavity ports.
struct NoiseLevels {
    force: f64,
    input: f64,
    loss: f64,
}

/// One trajectory's sampled axial displacement and homodyne record.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub z: Vec<f64>,
    /// Output quadrature averaged over each step.
    pub quadrature: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub config: SimConfig,
    /// Angular frequencies of the PSD bins.
    pub freqs: Vec<f64>,
    pub psd_z: Vec<f64>,
    pub psd_quadrature: Vec<f64>,
    pub segments: usize,
    pub fit: LineFit,
    pub center_err: f64,
    pub linewidth_err: f64,
    pub batch_fits: Vec<LineFit>,
    /// Time-averaged z^2 over every recorded sample.
    pub z_variance: f64,
}

// Augmented state: z, p, Re a, Im a, then the step integrals of a and of the input noise.
type M8 = SMatrix<f64, 8, 8>;
type M16 = SMatrix<f64, 16, 16>;

struct LabStepper {
    /// Columns of the transition acting on (z, p, Re a, Im a).
    phi: [[f64; 4]; 8],
    chol: [[f64; 8]; 8],
}

impl LabStepper {
    fn new(c: &SimConfig) -> Self {
        let n = c.noise_levels();
        let kappa = c.kappa_in + c.kappa_add;
        let mut a = M8::zeros();
        a[(0, 1)] = 1.0;
        a[(1, 0)] = -c.omega_z * c.omega_z;
        a[(1, 1)] = -c.gamma;
        a[(1, 2)] = 2.0 * c.coupling;
        a[(2, 2)] = -0.5 * kappa;
        a[(2, 3)] = c.omega_k;
        a[(3, 2)] = -c.omega_k;
        a[(3, 3)] = -0.5 * kappa;
        a[(3, 0)] = c.coupling;
        a[(4, 2)] = 1.0;
        a[(5, 3)] = 1.0;

        let mut q = M8::zeros();
        q[(1, 1)] = n.force;
        let (si, sa) = (c.kappa_in.sqrt(), c.kappa_add.sqrt());
        for (cav, w) in [(2usize, 6usize), (3, 7)] {
            let hi = 0.5 * n.input;
            let hl = 0.5 * n.loss;
            q[(cav, cav)] += hi * si * si + hl * sa * sa;
            q[(cav, w)] += hi * si;
            q[(w, cav)] += hi * si;
            q[(w, w)] += hi;
        }

        // Van Loan: exp([[-A, Q], [0, A^T]] dt) holds the transition and the step covariance
        let mut big = M16::zeros();
        big.fixed_view_mut::<8, 8>(0, 0).copy_from(&(-a * c.dt));
        big.fixed_view_mut::<8, 8>(0, 8).copy_from(&(q * c.dt));
        big.fixed_view_mut::<8, 8>(8, 8).copy_from(&(a.transpose() * c.dt));
        let e = big.exp();
        let phi_full: M8 = e.fixed_view::<8, 8>(8, 8).transpose();
        let cov: M8 = phi_full * e.fixed_view::<8, 8>(0, 8);
        let cov = 0.5 * (cov + cov.transpose());
        let eig = SymmetricEigen::new(cov);
        let mut root = M8::zeros();
        for j in 0..8 {
            let s = eig.eigenvalues[j].max(0.0).sqrt();
            for i in 0..8 {
                root[(i, j)] = eig.eigenvectors[(i, j)] * s;
            }
        }
        let mut phi = [[0.0; 4]; 8];
        let mut chol = [[0.0; 8]; 8];
        for i in 0..8 {
            for j in 0..4 {
                phi[i][j] = phi_full[(i, j)];
            }
            for j in 0..8 {
                chol[i][j] = root[(i, j)];
            }
        }
        LabStepper { phi, chol }
    }

    #[inline]
    fn step(&self, y: &[f64; 4], xi: &[f64; 8]) -> [f64; 8] {
        let mut out = [0.0; 8];
        for i in 0..8 {
            let mut v = 0.0;
            for j in 0..4 {
                v += self.phi[i][j] * y[j];
            }
            for j in 0..8 {
                v += self.chol[i][j] * xi[j];
            }
            out[i] = v;
        }
        out
    }
}

fn check_state(y: &[f64; 4], trajectory: u64, step: usize) -> Result<()> {
    if y.iter().all(|v| v.is_finite() && v.abs() < 1e150) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { trajectory, step })
    }
}

fn rng_for(c: &SimConfig, trajectory: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    rng.set_stream(trajectory);
    rng
}

fn run_lab(c: &SimConfig, trajectory: u64) -> Result<Trajectory> {
    let stepper = LabStepper::new(c);
    let mut rng = rng_for(c, trajectory);
    let (ct, st) = (c.theta.cos(), c.theta.sin());
    let si = c.kappa_in.sqrt();
    let burn = c.burn_in();
    let mut y = [0.0; 4];
    let mut traj = Trajectory { z: Vec::with_capacity(c.n_steps), quadrature: Vec::with_capacity(c.n_steps) };
    let mut xi = [0.0; 8];
    for step in 0..burn + c.n_steps {
        for v in xi.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let out = stepper.step(&y, &xi);
        y.copy_from_slice(&out[..4]);
        if step % CHECK_EVERY == 0 {
            check_state(&y, trajectory, step)?;
        }
        if step >= burn {
            let re = out[6] - si * out[4];
            let im = out[7] - si * out[5];
            traj.z.push(y[0]);
            traj.quadrature.push(2.0 * (re * ct + im * st) / c.dt);
        }
    }
    check_state(&y, trajectory, burn + c.n_steps)?;
    Ok(traj)
}

fn run_rotating(c: &SimConfig, trajectory: u64) -> Result<Trajectory> {
    let n = c.noise_levels();
    let mut rng = rng_for(c, trajectory);
    let (ct, st) = (c.theta.cos(), c.theta.sin());
    let (si, sa) = (c.kappa_in.sqrt(), c.kappa_add.sqrt());
    let half_kappa = 0.5 * (c.kappa_in + c.kappa_add);
    let detuning = c.omega_k - c.omega_in;
    let (sd_f, sd_in, sd_loss) =
        ((n.force * c.dt).sqrt(), (0.5 * n.input * c.dt).sqrt(), (0.5 * n.loss * c.dt).sqrt());
    let burn = c.burn_in();
    let g = c.coupling;
    let mut y = Vector4::zeros();
    let mut traj = Trajectory { z: Vec::with_capacity(c.n_steps), quadrature: Vec::with_capacity(c.n_steps) };
    for step in 0..burn + c.n_steps {
        let phase = (c.omega_in * (step as f64 + 0.5) * c.dt).rem_euclid(std::f64::consts::TAU);
        let (sp, cp) = phase.sin_cos();
        #[rustfmt::skip]
        let a = Matrix4::new(
            0.0, 1.0, 0.0, 0.0,
            -c.omega_z * c.omega_z, -c.gamma, 2.0 * g * cp, 2.0 * g * sp,
            -g * sp, 0.0, -half_kappa, detuning,
            g * cp, 0.0, -detuning, -half_kappa,
        );
        let f: f64 = sd_f * rng.sample::<f64, _>(StandardNormal);
        let win = (sd_in * rng.sample::<f64, _>(StandardNormal), sd_in * rng.sample::<f64, _>(StandardNormal));
        let wl = (sd_loss * rng.sample::<f64, _>(StandardNormal), sd_loss * rng.sample::<f64, _>(StandardNormal));
        let b = Vector4::new(0.0, f, si * win.0 + sa * wl.0, si * win.1 + sa * wl.1);
        let half = a * (0.5 * c.dt);
        let lhs = Matrix4::identity() - half;
        let rhs = (Matrix4::identity() + half) * y + b;
        let next = lhs.lu().solve(&rhs).ok_or(Error::NonFiniteState { trajectory, step })?;
        if step >= burn {
            // back to the lab frame: a = a_rot e^{-i phase}
            let mr = 0.5 * (y[2] + next[2]) * c.dt;
            let mi = 0.5 * (y[3] + next[3]) * c.dt;
            let (ar, ai) = (mr * cp + mi * sp, mi * cp - mr * sp);
            let (wr, wi) = (win.0 * cp + win.1 * sp, win.1 * cp - win.0 * sp);
            let re = wr - si * ar;
            let im = wi - si * ai;
            traj.z.push(next[0]);
            traj.quadrature.push(2.0 * (re * ct + im * st) / c.dt);
        }
        y = next;
        if step % CHECK_EVERY == 0 {
            check_state(&[y[0], y[1], y[2], y[3]], trajectory, step)?;
        }
    }
    check_state(&[y[0], y[1], y[2], y[3]], trajectory, burn + c.n_steps)?;
    Ok(traj)
}

/// Integrate one trajectory; the same config and index always give the same record.
pub fn simulate_trajectory(c: &SimConfig, trajectory: u64) -> Result<Trajectory> {
    c.validate()?;
    match c.frame {
        Frame::Lab => run_lab(c, trajectory),
        Frame::Rotating => run_rotating(c, trajectory),
    }
}

struct Accum {
    z: Vec<f64>,
    x: Vec<f64>,
    segments: usize,
    z2: f64,
    samples: usize,
}

impl Accum {
    fn merge(mut self, o: Accum) -> Accum {
        self.z.iter_mut().zip(&o.z).for_each(|(a, b)| *a += b);
        self.x.iter_mut().zip(&o.x).for_each(|(a, b)| *a += b);
        self.segments += o.segments;
        self.z2 += o.z2;
        self.samples += o.samples;
        self
    }
}

/// Pairwise reduction in index order, so the sum never depends on scheduling.
fn pairwise(mut v: Vec<Accum>) -> Accum {
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(b),
                None => a,
            });
        }
        v = next;
    }
    v.pop().expect("at least one trajectory")
}

fn one(c: &SimConfig, welch: &Welch, trajectory: u64) -> Result<Accum> {
    let t = simulate_trajectory(c, trajectory)?;
    let mut z = vec![0.0; welch.bins()];
    let mut x = vec![0.0; welch.bins()];
    let segments = welch.accumulate(&t.z, &mut z);
    welch.accumulate(&t.quadrature, &mut x);
    let z2 = t.z.iter().map(|v| v * v).sum();
    Ok(Accum { z, x, segments, z2, samples: t.z.len() })
}

/// Run every trajectory, average the spectra and fit the axial line.
pub fn simulate(c: &SimConfig) -> Result<SimResult> {
    c.validate()?;
    let welch = Welch::new(c.segment_len, c.dt);
    let n = c.n_trajectories;
    let batches: Vec<Accum> = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let parts: Vec<Accum> = (b * n / BATCHES..(b + 1) * n / BATCHES)
                .into_par_iter()
                .map(|t| one(c, &welch, t as u64))
                .collect::<Result<_>>()?;
            Ok(pairwise(parts))
        })
        .collect::<Result<_>>()?;

    let freqs = welch.freqs();
    let mut batch_fits = Vec::with_capacity(BATCHES);
    for b in &batches {
        let avg: Vec<f64> = b.z.iter().map(|v| v / b.segments as f64).collect();
        batch_fits.push(fit_resonance(&freqs, &avg)?);
    }
    let total = pairwise(batches);
    let norm = total.segments as f64;
    let psd_z: Vec<f64> = total.z.iter().map(|v| v / norm).collect();
    let psd_quadrature: Vec<f64> = total.x.iter().map(|v| v / norm).collect();
    let fit = fit_resonance(&freqs, &psd_z)?;
    let spread = |get: fn(&LineFit) -> f64| {
        let m = batch_fits.iter().map(get).sum::<f64>() / BATCHES as f64;
        let var = batch_fits.iter().map(|f| (get(f) - m).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        (var / BATCHES as f64).sqrt()
    };
    Ok(SimResult {
        config: c.clone(),
        freqs,
        psd_z,
        psd_quadrature,
        segments: total.segments,
        fit,
        center_err: spread(|f| f.center),
        linewidth_err: spread(|f| f.linewidth),
        batch_fits,
        z_variance: total.z2 / total.samples as f64,
    })
}
