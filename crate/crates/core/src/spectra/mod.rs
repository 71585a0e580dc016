//! Force-noise spectral densities, all symmetrized and in N^2/Hz.

mod electrode;
mod magnet;
mod readout;
mod tls;

pub use electrode::{s_ff_dielectric, s_ff_johnson, skin_depth, ElectrodeMaterial};
pub use magnet::{magnetization_variance, mean_orbit, s_bb_barkhausen, s_ff_barkhausen, s_mm_barkhausen, MagnetMaterial};
pub use readout::{
    s_ff_backaction_approx, s_ff_backaction_full, s_ff_cross_full, s_ff_imprecision_approx, s_ff_imprecision_full,
    s_ff_intrinsic, s_ff_readout_additional, sql_bound,
};
pub use tls::{s_ff_tls, tls_loss_tangent, tls_relaxation_integral, TlsMaterial, P0_CGS_TO_SI};

/// A named spectrum aligned with a frequency grid.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SpectrumChannel {
    pub name: String,
    pub values: Vec<f64>,
}
