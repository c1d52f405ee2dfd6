//! Cyclic prepare–interrogate–measure protocol and the periodogram-based
//! spectrum analyzer built on it.
//!
//! Detunings and bin frequencies are angular (rad/s); times are seconds.
//! Calibrated spectra are in e²/Hz with Δf = Δω/2π.

mod aliasing;
mod analytic;
mod calibration;
mod periodogram;
mod protocol;
mod record;
mod sensitivity;

pub use aliasing::{aliasing_map, predicted_peaks, AliasPoint};
pub use analytic::{
    expected_transform, lineshape_exact, lineshape_incoherent, lineshape_sinc2, signal_amplitude, snr_in_band,
    snr_predict, MAIN_LOBE_FRACTION,
};
pub use calibration::{calibrate_spectrum, CalibratedSpectrum, MIN_CALIBRATION_SNR};
pub use periodogram::{bartlett_average, Axis, periodogram, simulate_spectrum, Periodogram, SpectrumEstimate};
pub use protocol::{CalibrationTone, ProtocolConfig, SensorQubit};
pub use record::{simulate_record, telegraph_transform, MeasurementRecord, RAW_MAGIC};
pub use sensitivity::{optimal_ideal, sensitivity, sensitivity_curve, Scenario, SensitivityCurve};
