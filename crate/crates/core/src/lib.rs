//! Force-noise budget of a single trapped electron read out through a microwave cavity.
//!
//! Bottom-up: [`physics`] gives trap modes, cavity and coupling; [`damping`] collects the
//! axial damping channels; [`spectra`] holds every force-noise density; [`budget`] puts them
//! on a frequency grid. [`optimize`] searches designs, [`langevin`] checks the readout chain
//! in the time domain and [`cli`] is the command-line front end.

pub mod budget;
pub mod cli;
pub mod config;
pub mod constants;
pub mod damping;
pub mod error;
pub mod langevin;
pub mod optimize;
pub mod physics;
pub mod simplex;
pub mod spectra;

pub use config::SystemConfig;
pub use constants::{PhysConstants, CODATA_2018};
pub use error::{Error, Result};
