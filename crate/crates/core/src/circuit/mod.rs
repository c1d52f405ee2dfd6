//! Fluxonium circuit: Hamiltonian in the oscillator basis, spectra and matrix
//! elements.
//!
//! All energies are E/h in Hz. The phase operator and the charge operator are
//! dimensionless.

mod eigen;
mod operators;
mod params;
mod spectrum;

pub use eigen::{diagonalize_and_label, EigenSolution, Level};
pub use operators::{BasisConfig, OperatorSet};
pub use params::{CircuitParams, FluxBias, RegimeFlags};
pub use spectrum::{
    matrix_elements, spectrum_vs_flux, sweep_solutions, tunnel_splitting, Fluxonium,
    MatrixElements, TransitionTable,
};
