use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};

/// Readout mode. `omega_r` and `kappa` are angular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCavityParams {
    pub omega_r: f64,
    pub kappa: f64,
    pub phi_zpf_r: f64,
}

impl ReadoutCavityParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("omega_R", self.omega_r)?;
        require_positive("kappa", self.kappa)?;
        require_positive("phi_zpf_R", self.phi_zpf_r)?;
        if self.phi_zpf_r > 0.1 {
            log::warn!("phi_zpf_R = {} is not small; the linearized coupling is doubtful", self.phi_zpf_r);
        }
        Ok(())
    }

    /// g = E_J φ²_zpf,R with E_J given as an angular frequency.
    pub fn coupling(&self, e_j_angular: f64) -> f64 {
        e_j_angular * self.phi_zpf_r * self.phi_zpf_r
    }
}

/// Coherent drive of the readout mode, in the frame rotating at the pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenCavityConfig {
    pub epsilon_d: Complex64,
    /// Δ_R = ω_p − ω_R.
    pub delta_r: f64,
}

impl DrivenCavityConfig {
    /// Δ_R^± = Δ_R ± ω_ge.
    pub fn sideband_detunings(&self, omega_ge: f64) -> (f64, f64) {
        (self.delta_r + omega_ge, self.delta_r - omega_ge)
    }
}

/// Stationary displacement α = −ε_d/(Δ_R + iκ/2).
pub fn steady_state_alpha(cfg: &DrivenCavityConfig, kappa: f64) -> Result<Complex64> {
    require_positive("kappa", kappa)?;
    Ok(-cfg.epsilon_d / Complex64::new(cfg.delta_r, 0.5 * kappa))
}

/// Coefficient of the linear drift term left after displacing the cavity by
/// α: iκα/2 from damping, Δ_Rα from the detuning and ε_d from the drive.
/// Vanishes at the stationary α.
pub fn drift_residual(cfg: &DrivenCavityConfig, kappa: f64, alpha: Complex64) -> Complex64 {
    let h1 = alpha * Complex64::new(0.0, 0.5 * kappa);
    let h2 = alpha * cfg.delta_r;
    let h3 = cfg.epsilon_d;
    h1 + h2 + h3
}

/// Effective sideband rates after eliminating the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveLossReport {
    /// Rate of the σ⁺ channel, resonant at Δ_R^+ = 0.
    pub rate_raise: f64,
    /// Rate of the σ⁻ channel, resonant at Δ_R^− = 0.
    pub rate_lower: f64,
    /// ε = g|c_x||α|/κ.
    pub epsilon: f64,
    /// 2ω_ge/κ.
    pub sideband_resolution: f64,
    /// κ ≫ g|c_x||α| (ε ≤ 0.1).
    pub kappa_dominates: bool,
    /// 2ω_ge/κ ≥ 5.
    pub resolved_sideband: bool,
}

/// Lorentzian sideband rates (g|c_x||α|)²κ/(Δ² + κ²/4).
pub fn effective_loss_rates(
    c_x: f64,
    g: f64,
    alpha: Complex64,
    kappa: f64,
    delta_r: f64,
    omega_ge: f64,
) -> Result<EffectiveLossReport> {
    require_positive("kappa", kappa)?;
    let coupling = g * c_x.abs() * alpha.norm();
    let lorentz = |d: f64| coupling * coupling * kappa / (d * d + 0.25 * kappa * kappa);
    let epsilon = coupling / kappa;
    let resolution = 2.0 * omega_ge.abs() / kappa;
    if epsilon > 0.1 {
        log::warn!("expansion parameter g|c_x||alpha|/kappa = {epsilon:.3} exceeds 0.1");
    }
    Ok(EffectiveLossReport {
        rate_raise: lorentz(delta_r + omega_ge),
        rate_lower: lorentz(delta_r - omega_ge),
        epsilon,
        sideband_resolution: resolution,
        kappa_dominates: epsilon <= 0.1,
        resolved_sideband: resolution >= 5.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_drive_alpha() {
        let cfg = DrivenCavityConfig {
            epsilon_d: Complex64::new(3.0, 0.0),
            delta_r: 0.0,
        };
        let a = steady_state_alpha(&cfg, 2.0).unwrap();
        assert!((a - Complex64::new(0.0, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn drift_cancels_at_stationary_alpha() {
        let cfg = DrivenCavityConfig {
            epsilon_d: Complex64::new(1.3e6, -0.4e6),
            delta_r: -7.1e7,
        };
        let kappa = 1.5e7;
        let a = steady_state_alpha(&cfg, kappa).unwrap();
        let r = drift_residual(&cfg, kappa, a);
        assert!(r.norm() < 1e-12 * cfg.epsilon_d.norm());
    }

    #[test]
    fn lorentzian_half_width() {
        let (k, w) = (1.0e7, 6.0e7);
        let on = effective_loss_rates(1e-3, 1e8, Complex64::new(10.0, 0.0), k, w, w).unwrap();
        let off = effective_loss_rates(1e-3, 1e8, Complex64::new(10.0, 0.0), k, w + k / 2.0, w).unwrap();
        assert!((off.rate_lower / on.rate_lower - 0.5).abs() < 1e-14);
        let c = 1e-3 * 1e8 * 10.0;
        assert!((on.rate_lower - 4.0 * c * c / k).abs() < 1e-9 * on.rate_lower);
    }

    #[test]
    fn no_cooling_without_transverse_element() {
        let r = effective_loss_rates(0.0, 1e8, Complex64::new(10.0, 0.0), 1e7, 6e7, 6e7).unwrap();
        assert_eq!(r.rate_raise, 0.0);
        assert_eq!(r.rate_lower, 0.0);
    }
}
