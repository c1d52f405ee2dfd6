//! Open-system dynamics.
//!
//! Every rate, frequency and detuning in this module is angular (rad/s) and
//! every time is in seconds. Hamiltonians are in rad/s (ℏ = 1).

mod bloch;
mod cavity;
mod chevron;
mod cooling;
mod lindblad;
mod qubit;
mod ramp;

pub(crate) use bloch::sinc;
pub use bloch::{bloch_closed_form, bloch_rhs, detector_response, BlochState, DetectorResponse};
pub use cavity::{
    drift_residual, effective_loss_rates, steady_state_alpha, DrivenCavityConfig,
    EffectiveLossReport, ReadoutCavityParams,
};
pub use chevron::{
    fit_rabi_frequency, rabi_chevron, rabi_trace, rwa_trace, ChevronConfig, ChevronMap, DriveCoupling,
};
pub use cooling::{
    cooling_map, effective_cooling_trace, fit_exponential_rate, full_cooling_trace,
    sideband_cooling_compare, steady_preparation, CoolingComparison, CoolingMap, CoolingMapConfig,
    CoolingSetup, PreparationEstimate, Sideband,
};
pub use lindblad::{
    lindblad_evolve, schrodinger_evolve, DensityMatrix, Hamiltonian, LindbladSystem, Trajectory,
};
pub use qubit::{QubitDissipation, QubitModel};
pub use ramp::{flux_ramp, PiecewiseLinear, RampReport};
