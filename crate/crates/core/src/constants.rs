//! Physical constants (SI, CODATA 2018 exact where defined).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Superconducting flux quantum h/2e, Wb.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// Bundle of the constants used by the models, so that callers can pass
/// them around or serialize them into run manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub elementary_charge: f64,
    pub boltzmann: f64,
    pub vacuum_permittivity: f64,
    pub flux_quantum: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

impl PhysicalConstants {
    pub const SI: Self = Self {
        hbar: HBAR,
        elementary_charge: ELEMENTARY_CHARGE,
        boltzmann: BOLTZMANN,
        vacuum_permittivity: VACUUM_PERMITTIVITY,
        flux_quantum: FLUX_QUANTUM,
    };

    /// Frequency in Hz to angular frequency in rad/s.
    pub fn angular(freq_hz: f64) -> f64 {
        2.0 * PI * freq_hz
    }

    /// Angular frequency in rad/s to Hz.
    pub fn hertz(omega: f64) -> f64 {
        omega / (2.0 * PI)
    }

    /// Energy of a quantum ħω in joules.
    pub fn quantum_energy(&self, omega: f64) -> f64 {
        self.hbar * omega
    }

    pub fn is_consistent(&self) -> bool {
        let all_positive = [
            self.hbar,
            self.elementary_charge,
            self.boltzmann,
            self.vacuum_permittivity,
            self.flux_quantum,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        let phi0 = PI * self.hbar / self.elementary_charge;
        all_positive && ((self.flux_quantum - phi0) / phi0).abs() < 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_constants_are_consistent() {
        assert!(PhysicalConstants::SI.is_consistent());
    }

    #[test]
    fn flux_quantum_matches_hbar_over_e() {
        let phi0 = PI * HBAR / ELEMENTARY_CHARGE;
        assert!(((FLUX_QUANTUM - phi0) / phi0).abs() < 1e-12);
        assert!((FLUX_QUANTUM - 2.067_833_848e-15).abs() < 1e-23);
    }

    #[test]
    fn inconsistent_bundle_detected() {
        let mut c = PhysicalConstants::SI;
        c.flux_quantum *= 1.0 + 1e-9;
        assert!(!c.is_consistent());
    }
}
