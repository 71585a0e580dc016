//! Time-domain cross-check of the analytic readout chain.

mod compare;
mod fit;
mod sim;
mod welch;

pub use compare::{analytic_output, compare_to_analytic, AnalyticOutput, BandBin, ComparisonReport, LineCheck};
pub use fit::{fit_resonance, LineFit, FIT_HALF_WINDOW};
pub use sim::{simulate, simulate_trajectory, Frame, SimConfig, SimResult, Trajectory, BATCHES};
pub use welch::Welch;
