//! Ideal Penning-trap modes, the antenna coupling and the linear response functions.

mod cavity;
mod coupling;
mod modes;
mod response;

pub use cavity::{chi_cavity, chi_cavity_counter, CavityConfig};
pub use coupling::{auto_antenna_length, coupling_strength, AntennaConfig};
pub use modes::{derive_modes, occupation_plus_half, thermal_occupation, ElectronModes, TrapConfig};
pub use response::{chi_eff, chi_mech, dynamical_backaction, ComplexResponse};
