use serde::Serialize;

use super::analytic::MAIN_LOBE_FRACTION;
use super::periodogram::SpectrumEstimate;
use super::protocol::CalibrationTone;
use crate::error::{Error, Result};

/// Half-width, in resolution bandwidths, of the neighbourhoods around the
/// tone and its image that are left out of the floor estimate.
const FLOOR_GUARD_RBW: usize = 20;

/// Minimum peak SNR accepted for calibration.
pub const MIN_CALIBRATION_SNR: f64 = 3.0;

/// Spectrum in e²/Hz, scaled so that the calibration line integrates to the
/// known (2·N_drive)².
#[derive(Debug, Clone, Serialize)]
pub struct CalibratedSpectrum {
    pub s_ee: Vec<f64>,
    /// e²/Hz per unit of raw S_n.
    pub scale: f64,
    /// Raw off-peak mean.
    pub floor: f64,
    pub floor_ee: f64,
    /// √floor_ee in e/√Hz.
    pub delta_q: f64,
    pub peak_bin: usize,
    /// Centered angular frequency of the peak bin.
    pub peak_frequency: f64,
    pub peak_height: f64,
    pub snr: f64,
}

pub fn calibrate_spectrum(raw: &SpectrumEstimate, tone: &CalibrationTone) -> Result<CalibratedSpectrum> {
    tone.validate()?;
    let axis = raw.axis;
    let m = axis.len();
    let np = axis.padding;
    let peak = raw.peak_bin();
    let nyquist = std::f64::consts::PI / axis.tau;
    let image = axis.nearest_bin(nyquist - axis.bin_frequency(peak));
    let floor = raw.mean_excluding(&[peak, image], FLOOR_GUARD_RBW * np);
    if !(floor > 0.0) {
        return Err(Error::Calibration(format!("no usable noise floor (mean {floor})")));
    }
    let height = raw.s[peak] - floor;
    let snr = (height.max(0.0) / floor).sqrt();
    if snr < MIN_CALIBRATION_SNR {
        return Err(Error::Calibration(format!(
            "calibration peak SNR {snr:.3} below {MIN_CALIBRATION_SNR}"
        )));
    }
    // Main lobe between the first zeros at ±Ω_RBW = ±N_p bins.
    let lobe: f64 = (0..=2 * np)
        .map(|j| raw.s[(peak + m + j - np) % m] - floor)
        .sum();
    let area = lobe * axis.bin_width_hz() / MAIN_LOBE_FRACTION;
    if !(area > 0.0) {
        return Err(Error::Calibration("calibration lobe has no area above the floor".into()));
    }
    let scale = (2.0 * tone.n_drive).powi(2) / area;
    let floor_ee = floor * scale;
    Ok(CalibratedSpectrum {
        s_ee: raw.s.iter().map(|v| v * scale).collect(),
        scale,
        floor,
        floor_ee,
        delta_q: floor_ee.sqrt(),
        peak_bin: peak,
        peak_frequency: axis.centered_frequency(peak),
        peak_height: height,
        snr,
    })
}
