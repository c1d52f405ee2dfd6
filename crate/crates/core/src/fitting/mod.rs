//! Synthetic readout data and the calibration fits run on it.

mod coherence;
mod histogram;
mod rabi;
mod readout;
mod temperature;

pub use coherence::{dominant_frequency, fit_ramsey, fit_relaxation, pure_dephasing_rate, RamseyFit, RelaxationFit};
pub use histogram::{fit_thermal_histogram, Histogram, PeakGuess, ThermalHistogramFit, HISTOGRAM_BINS, HISTOGRAM_HALF_WIDTH};
pub use rabi::{
    fit_rabi_curves, synthesize_rabi_curves, PrepFidelity, PrepFidelityFit, Preparation, RabiCurves, RabiFitOptions,
    DEFAULT_BOOTSTRAP, PREP_THERMAL,
};
pub use readout::{normal_cdf, synthesize_iq, Conditionals, IqSamples, ReadoutModel, ReadoutState};
pub use temperature::{
    boltzmann_ratio, temperature_from_populations, thermal_ground_probability, thermal_occupation,
    TemperatureEstimate, TemperatureMode, TemperatureStatus,
};
