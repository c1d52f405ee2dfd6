use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Circuit energies as E/h in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub e_j: f64,
    pub e_c: f64,
    pub e_l: f64,
    /// Josephson energy of a single array junction.
    #[serde(default)]
    pub e_ja: Option<f64>,
    /// Plasma frequency of the array junctions.
    #[serde(default)]
    pub e_p: Option<f64>,
    #[serde(default)]
    pub n_array_junctions: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeFlags {
    /// `E_J ≥ 10 E_C` and `E_J ≥ 10 E_L`.
    pub heavy_fluxonium: bool,
    /// `E_JA / E_p ≥ 3`, when the array energies are known.
    pub array_valid: Option<bool>,
}

impl CircuitParams {
    pub fn new(e_j: f64, e_c: f64, e_l: f64) -> Result<Self> {
        let p = Self {
            e_j,
            e_c,
            e_l,
            e_ja: None,
            e_p: None,
            n_array_junctions: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// The device studied throughout the crate's examples.
    pub fn reference_device() -> Self {
        Self {
            e_j: 5.178e9,
            e_c: 0.4144e9,
            e_l: 0.18e9,
            e_ja: None,
            e_p: None,
            n_array_junctions: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("E_J", self.e_j)?;
        require_positive("E_C", self.e_c)?;
        require_positive("E_L", self.e_l)?;
        if let Some(v) = self.e_ja {
            require_positive("E_JA", v)?;
        }
        if let Some(v) = self.e_p {
            require_positive("E_p", v)?;
        }
        if self.n_array_junctions == Some(0) {
            return Err(Error::param("n_array_junctions", "must be at least 1"));
        }
        Ok(())
    }

    pub fn regime(&self) -> RegimeFlags {
        RegimeFlags {
            heavy_fluxonium: self.e_j >= 10.0 * self.e_c && self.e_j >= 10.0 * self.e_l,
            array_valid: match (self.e_ja, self.e_p) {
                (Some(ja), Some(p)) => Some(ja / p >= 3.0),
                _ => None,
            },
        }
    }

    /// ℓ² = √(8E_C/E_L).
    pub fn oscillator_length_sq(&self) -> f64 {
        (8.0 * self.e_c / self.e_l).sqrt()
    }

    /// Level spacing √(8E_C E_L) of the E_J = 0 oscillator, in Hz.
    pub fn plasma_frequency(&self) -> f64 {
        (8.0 * self.e_c * self.e_l).sqrt()
    }
}

/// External flux as the phase φ_ext = 2πΦ_ext/Φ₀ (radians).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FluxBias(f64);

impl FluxBias {
    pub const FRUSTRATION: FluxBias = FluxBias(PI);

    pub fn new(phi_ext: f64) -> Result<Self> {
        if phi_ext.is_finite() {
            Ok(Self(phi_ext))
        } else {
            Err(Error::param("phi_ext", format!("must be finite, got {phi_ext}")))
        }
    }

    /// From Φ_ext/Φ₀.
    pub fn from_flux_quanta(x: f64) -> Result<Self> {
        Self::new(TAU * x)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn flux_quanta(self) -> f64 {
        self.0 / TAU
    }

    /// φ_ext reduced to [0, 2π), for reporting.
    pub fn reduced(self) -> f64 {
        self.0.rem_euclid(TAU)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_device_is_heavy() {
        let p = CircuitParams::reference_device();
        assert!(p.regime().heavy_fluxonium);
        assert!((p.oscillator_length_sq() - 4.2913).abs() < 1e-3);
    }

    #[test]
    fn non_positive_energy_rejected() {
        assert!(matches!(
            CircuitParams::new(1.0, 0.0, 1.0),
            Err(Error::Parameter { name: "E_C", .. })
        ));
        assert!(CircuitParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn array_flag() {
        let mut p = CircuitParams::reference_device();
        assert_eq!(p.regime().array_valid, None);
        p.e_ja = Some(30e9);
        p.e_p = Some(15e9);
        assert_eq!(p.regime().array_valid, Some(false));
        p.e_ja = Some(60e9);
        assert_eq!(p.regime().array_valid, Some(true));
    }

    #[test]
    fn flux_reduction() {
        let f = FluxBias::from_flux_quanta(1.5).unwrap();
        assert!((f.reduced() - PI).abs() < 1e-12);
        assert!((f.flux_quanta() - 1.5).abs() < 1e-15);
        assert!(FluxBias::new(f64::INFINITY).is_err());
    }
}
