//! Numerical laboratory for a MHz-frequency heavy-fluxonium charge sensor.
//!
//! The crate is organised by physical subsystem:
//!
//! * [`circuit`] builds and diagonalizes the fluxonium Hamiltonian in a
//!   truncated oscillator basis and extracts transitions and matrix elements.
//! * [`dynamics`] integrates Lindblad master equations: driven-cavity sideband
//!   cooling, flux ramps, Rabi chevrons and the closed-form Bloch solution.
//! * [`sensing`] simulates the cyclic prepare/interrogate/measure protocol and
//!   the periodogram-based spectrum analyzer, with analytic predictions.
//! * [`fitting`] generates synthetic readout data and runs the calibration fits.
//! * [`electromech`] estimates the charge modulation of a DC-biased membrane.
//!
//! Frequencies handed to dynamical routines are angular (rad/s). Circuit
//! energies are stored as E/h in Hz, matching how device parameters are quoted.

pub mod circuit;
pub mod constants;
pub mod dynamics;
pub mod electromech;
pub mod error;
pub mod fitting;
pub mod linalg;
pub mod lsq;
pub mod ode;
pub mod optimize;
pub mod sensing;

pub use error::{Error, Result};
