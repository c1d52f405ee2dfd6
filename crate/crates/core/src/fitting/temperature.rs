use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureMode {
    /// Ratio of the {g,e} to {f,h} manifold populations across ω_ef.
    Manifold,
    /// Ground-state probability of a two-level system after preparation.
    TwoLevelPrep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureStatus {
    Finite,
    /// Equal populations.
    Infinite,
    /// Population inversion; no positive temperature exists.
    Inverted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureEstimate {
    /// Kelvin; `None` unless the status is finite.
    pub temperature: Option<f64>,
    pub status: TemperatureStatus,
    /// Transition frequency used, Hz.
    pub frequency: f64,
    /// Lower-to-upper population ratio the estimate was derived from.
    pub ratio: f64,
}

/// `value` is the population ratio in manifold mode or the ground-state
/// probability in prep mode. `frequency` is in Hz.
pub fn temperature_from_populations(value: f64, frequency: f64, mode: TemperatureMode) -> Result<TemperatureEstimate> {
    require_positive("frequency", frequency)?;
    let ratio = match mode {
        TemperatureMode::Manifold => {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Input(format!("population ratio must be positive, got {value}")));
            }
            value
        }
        TemperatureMode::TwoLevelPrep => {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::Input(format!("probability must lie in (0, 1), got {value}")));
            }
            value / (1.0 - value)
        }
    };
    let log_ratio = match mode {
        TemperatureMode::Manifold => ratio.ln(),
        TemperatureMode::TwoLevelPrep => value.ln() - (1.0 - value).ln(),
    };
    let (temperature, status) = if log_ratio > 0.0 {
        let omega = 2.0 * std::f64::consts::PI * frequency;
        (Some(HBAR * omega / (BOLTZMANN * log_ratio)), TemperatureStatus::Finite)
    } else if log_ratio == 0.0 {
        (None, TemperatureStatus::Infinite)
    } else {
        (None, TemperatureStatus::Inverted)
    };
    Ok(TemperatureEstimate {
        temperature,
        status,
        frequency,
        ratio,
    })
}

/// Boltzmann factor e^{ħω/k_BT} between two levels split by `frequency` (Hz).
pub fn boltzmann_ratio(temperature: f64, frequency: f64) -> Result<f64> {
    require_positive("temperature", temperature)?;
    require_positive("frequency", frequency)?;
    Ok((HBAR * 2.0 * std::f64::consts::PI * frequency / (BOLTZMANN * temperature)).exp())
}

/// Thermal ground-state probability of a two-level system.
pub fn thermal_ground_probability(temperature: f64, frequency: f64) -> Result<f64> {
    let r = boltzmann_ratio(temperature, frequency)?;
    Ok(r / (1.0 + r))
}

/// Bose occupation of a mode at `frequency` (Hz).
pub fn thermal_occupation(temperature: f64, frequency: f64) -> Result<f64> {
    require_positive("temperature", temperature)?;
    require_positive("frequency", frequency)?;
    let x = HBAR * 2.0 * std::f64::consts::PI * frequency / (BOLTZMANN * temperature);
    Ok(1.0 / x.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_probability_is_infinite() {
        let t = temperature_from_populations(0.5, 1.8e6, TemperatureMode::TwoLevelPrep).unwrap();
        assert_eq!(t.status, TemperatureStatus::Infinite);
        assert!(t.temperature.is_none());
        let t = temperature_from_populations(0.4, 1.8e6, TemperatureMode::TwoLevelPrep).unwrap();
        assert_eq!(t.status, TemperatureStatus::Inverted);
        let t = temperature_from_populations(0.7, 3.7e9, TemperatureMode::Manifold).unwrap();
        assert_eq!(t.status, TemperatureStatus::Inverted);
    }

    #[test]
    fn invalid_arguments_rejected() {
        assert!(temperature_from_populations(1.0, 1e6, TemperatureMode::TwoLevelPrep).is_err());
        assert!(temperature_from_populations(0.0, 1e6, TemperatureMode::Manifold).is_err());
        assert!(temperature_from_populations(2.0, -1.0, TemperatureMode::Manifold).is_err());
    }

    #[test]
    fn round_trip_both_modes() {
        for &t in &[1e-5, 2.3e-5, 0.059, 0.3] {
            let p = thermal_ground_probability(t, 1.8e6).unwrap();
            let back = temperature_from_populations(p, 1.8e6, TemperatureMode::TwoLevelPrep).unwrap();
            assert!((back.temperature.unwrap() / t - 1.0).abs() < 1e-10);
        }
        for &t in &[0.02, 0.059, 0.3, 2.0] {
            let r = boltzmann_ratio(t, 3.7e9).unwrap();
            let back = temperature_from_populations(r, 3.7e9, TemperatureMode::Manifold).unwrap();
            assert!((back.temperature.unwrap() / t - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn high_temperature_occupation_is_linear() {
        let f = 1.8e6;
        let n1 = thermal_occupation(0.05, f).unwrap();
        let n2 = thermal_occupation(0.10, f).unwrap();
        assert!((n2 / n1 - 2.0).abs() < 0.01);
    }
}
