use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Result};
use crate::optimize::golden_max;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// No dead time: τ = τ_I.
    Ideal,
    /// τ = τ_I + τ_prep.
    FixedPrep,
}

/// δq(τ_I) = √(4τ/(τ_I² ω² |φ|² e^{−2τ_I/T₁})) in e/√Hz.
pub fn sensitivity(tau_i: f64, t1: f64, omega_ge: f64, phi_ge: f64, scenario: Scenario, tau_prep: f64) -> f64 {
    let tau = match scenario {
        Scenario::Ideal => tau_i,
        Scenario::FixedPrep => tau_i + tau_prep,
    };
    let d = tau_i * omega_ge * phi_ge;
    (4.0 * tau / (d * d * (-2.0 * tau_i / t1).exp())).sqrt()
}

/// Closed-form ideal optimum (T₁/2, √(8e/(T₁ ω² |φ|²))).
pub fn optimal_ideal(t1: f64, omega_ge: f64, phi_ge: f64) -> (f64, f64) {
    (0.5 * t1, (8.0 * std::f64::consts::E / (t1 * (omega_ge * phi_ge).powi(2))).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityCurve {
    pub scenario: Scenario,
    pub t1: f64,
    pub tau_prep: f64,
    pub tau_i: Vec<f64>,
    pub delta_q: Vec<f64>,
    pub tau_i_opt: f64,
    pub delta_q_min: f64,
}

/// δq over `grid` plus the optimum found by golden-section search on
/// (0, 5T₁].
pub fn sensitivity_curve(
    t1: f64,
    omega_ge: f64,
    phi_ge: f64,
    scenario: Scenario,
    tau_prep: f64,
    grid: &[f64],
) -> Result<SensitivityCurve> {
    require_positive("T1", t1)?;
    require_positive("omega_ge", omega_ge)?;
    require_positive("phi_ge", phi_ge)?;
    require_non_negative("tau_prep", tau_prep)?;
    for &t in grid {
        require_positive("tau_I", t)?;
    }
    let f = |t: f64| sensitivity(t, t1, omega_ge, phi_ge, scenario, tau_prep);
    // Minimise δq² (smooth and unimodal in τ_I).
    let (tau_opt, neg) = golden_max(|t| -f(t).powi(2), 1e-6 * t1, 5.0 * t1, 1e-12);
    Ok(SensitivityCurve {
        scenario,
        t1,
        tau_prep,
        tau_i: grid.to_vec(),
        delta_q: grid.iter().map(|&t| f(t)).collect(),
        tau_i_opt: tau_opt,
        delta_q_min: (-neg).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    const W: f64 = TAU * 1.8e6;

    #[test]
    fn ideal_optimum_matches_closed_form() {
        let t1 = 34e-6;
        let c = sensitivity_curve(t1, W, PI, Scenario::Ideal, 0.0, &[]).unwrap();
        let (t_opt, dq) = optimal_ideal(t1, W, PI);
        assert!((c.tau_i_opt / t_opt - 1.0).abs() < 1e-6);
        assert!((c.delta_q_min / dq - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_prep_degradation_factor() {
        let (t1, tp) = (34e-6, 13e-6);
        for t in [5e-6, 20e-6, 60e-6] {
            let ideal = sensitivity(t, t1, W, PI, Scenario::Ideal, tp);
            let fixed = sensitivity(t, t1, W, PI, Scenario::FixedPrep, tp);
            let eta = t / (t + tp);
            assert!((fixed / ideal - (1.0 / eta).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_prep_optimum_stays_close() {
        let (t1, tp) = (34e-6, 13e-6);
        let a = sensitivity_curve(t1, W, PI, Scenario::Ideal, tp, &[]).unwrap();
        let b = sensitivity_curve(t1, W, PI, Scenario::FixedPrep, tp, &[]).unwrap();
        let r = b.delta_q_min / a.delta_q_min;
        assert!(r > 1.0 && r < 1.3, "ratio {r}");
    }

    #[test]
    fn reference_point_value() {
        let dq = sensitivity(20e-6, 34e-6, W, PI, Scenario::FixedPrep, 13e-6);
        assert!((dq / 29.1e-6 - 1.0).abs() < 0.01, "dq = {dq}");
    }
}
