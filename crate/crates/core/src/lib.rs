//! Simulation, control and evaluation toolkit for task-specific myoelectric
//! terminal devices.
//!
//! The crate is split along the data flow of a closed-loop run:
//!
//! * [`signal`] turns raw EMG samples into rolling mean-absolute-value activations.
//! * [`controllers`] maps two activation signals to motor set-points for the
//!   flicker, twister, suction, cutter, and the two humanoid baselines.
//! * [`mechanics`] holds the analytic device models (elastic striker, ratchet,
//!   gear drive, suction chamber, crank-rocker).
//! * [`metrics`] computes contour circularity and tracker angular deviation.
//! * [`stats`] runs the group comparisons (Mann-Whitney U, two-proportion z) and
//!   Bonferroni correction.
//! * [`harness`] wires the above together and owns file I/O.
//!
//! All lengths are SI internally. Config files use the units printed in their
//! key suffixes and are converted on load.

pub mod controllers;
pub mod error;
pub mod harness;
mod io;
pub mod mechanics;
pub mod metrics;
pub mod signal;
pub mod stats;

pub use error::{Error, Result};
