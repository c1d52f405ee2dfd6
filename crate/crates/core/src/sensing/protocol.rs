use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{bloch_closed_form, QubitDissipation};
use crate::error::{require_non_negative, require_positive, Error, Result};

/// Timing and windowing of the sensing protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Interrogation time τ_I.
    pub tau_i: f64,
    /// Preparation plus readout time.
    pub tau_prep: f64,
    /// Samples per window, N (even).
    pub n_window: usize,
    /// Zero-padding factor N_p.
    pub padding: usize,
    pub n_windows: usize,
    /// Readout efficiency applied to the signal.
    pub readout_scale: f64,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            tau_i: 20e-6,
            tau_prep: 13e-6,
            n_window: 1000,
            padding: 5,
            n_windows: 1000,
            readout_scale: 0.84,
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("tau_I", self.tau_i)?;
        require_positive("tau_prep", self.tau_prep)?;
        if self.n_window == 0 || !self.n_window.is_multiple_of(2) {
            return Err(Error::param("N", format!("window length must be even and > 0, got {}", self.n_window)));
        }
        if self.padding == 0 {
            return Err(Error::param("N_p", "padding factor must be at least 1"));
        }
        if !(self.readout_scale > 0.0 && self.readout_scale <= 1.0) {
            return Err(Error::param("readout_scale", format!("must lie in (0, 1], got {}", self.readout_scale)));
        }
        Ok(())
    }

    /// Cycle period τ = τ_I + τ_prep.
    pub fn tau(&self) -> f64 {
        self.tau_i + self.tau_prep
    }

    /// Padded transform length N_p·N.
    pub fn fft_len(&self) -> usize {
        self.n_window * self.padding
    }

    /// Ω_Ny = π/τ.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.tau()
    }

    /// Ω_RBW = 2π/(Nτ).
    pub fn rbw(&self) -> f64 {
        std::f64::consts::TAU / (self.n_window as f64 * self.tau())
    }

    /// Bin spacing 2π/(τ N_p N).
    pub fn bin_spacing(&self) -> f64 {
        self.rbw() / self.padding as f64
    }
}

/// Calibration tone of `n_drive` Cooper pairs at detuning Δ = ω_ge − ω_cal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTone {
    pub n_drive: f64,
    pub delta: f64,
    #[serde(default)]
    pub phase: f64,
}

impl CalibrationTone {
    pub fn validate(&self) -> Result<()> {
        require_non_negative("N_drive", self.n_drive)?;
        if !self.delta.is_finite() || !self.phase.is_finite() {
            return Err(Error::param("delta", "tone detuning and phase must be finite"));
        }
        Ok(())
    }
}

/// Qubit properties the sensing protocol needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorQubit {
    /// Angular ω_ge.
    pub omega_ge: f64,
    /// |⟨e|φ̂|g⟩|.
    pub phi_ge: f64,
    pub dissipation: QubitDissipation,
}

impl SensorQubit {
    pub fn validate(&self) -> Result<()> {
        require_positive("omega_ge", self.omega_ge)?;
        require_positive("phi_ge", self.phi_ge)?;
        self.dissipation.validate()
    }

    /// Ω_r = 2·N·ω_ge·|⟨e|φ̂|g⟩|.
    pub fn rabi_frequency(&self, n_drive: f64) -> f64 {
        2.0 * n_drive * self.omega_ge * self.phi_ge
    }

    /// ⟨σ⟩₀ = (s_x + i s_y)/2 after interrogation, rotated by the tone phase.
    /// Does not include the readout scale.
    pub fn sigma0(&self, tone: &CalibrationTone, tau_i: f64) -> Complex64 {
        let s = bloch_closed_form(self.rabi_frequency(tone.n_drive), tone.delta, self.dissipation.gamma, tau_i);
        Complex64::new(s.sx, s.sy) * 0.5 * Complex64::from_polar(1.0, tone.phase)
    }
}
