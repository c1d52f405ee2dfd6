//! Charge modulation of a DC-biased membrane capacitor and the resulting
//! qubit coupling figures.
//!
//! The membrane is a lumped oscillator of mass `m` and frequency `Ω_m` above a
//! fixed electrode at rest gap `h`. The total force on the plate at gap `z` is
//! `F(z) = −mΩ_m²(z − h) − V²ε₀S/(2z²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{ELEMENTARY_CHARGE, HBAR, VACUUM_PERMITTIVITY};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::optimize::{bisect, golden_max};

/// Relative mismatch between `C` and `ε₀S/h` above which a warning is logged.
pub const CAPACITANCE_TOLERANCE: f64 = 0.3;

/// Missing fields take their reference values; `x_zpf: null` derives the
/// zero-point motion from `mass`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MembraneParams {
    pub side: f64,
    pub stress: f64,
    /// Mechanical mode frequency, Hz.
    pub omega_m: f64,
    pub mass: f64,
    /// Tabulated zero-point motion; computed from `mass` when `None`.
    pub x_zpf: Option<f64>,
    pub density: f64,
    pub gap: f64,
    pub area: f64,
    pub capacitance: f64,
    pub bias: f64,
}

impl Default for MembraneParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl MembraneParams {
    /// Silicon-nitride membrane facing a 50 fF flip-chip electrode.
    pub fn reference() -> Self {
        Self {
            side: 150e-6,
            stress: 1e9,
            omega_m: 1.8e6,
            mass: 3e-12,
            x_zpf: Some(7e-15),
            density: 3200.0,
            gap: 500e-9,
            area: 90e-6 * 90e-6,
            capacitance: 50e-15,
            bias: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("side", self.side)?;
        require_positive("stress", self.stress)?;
        require_positive("omega_m", self.omega_m)?;
        require_positive("mass", self.mass)?;
        if let Some(x) = self.x_zpf {
            require_positive("x_zpf", x)?;
        }
        require_positive("density", self.density)?;
        require_positive("gap", self.gap)?;
        require_positive("area", self.area)?;
        require_positive("capacitance", self.capacitance)?;
        require_non_negative("bias", self.bias)?;
        Ok(())
    }

    fn omega_angular(&self) -> f64 {
        2.0 * PI * self.omega_m
    }

    fn stiffness(&self) -> f64 {
        self.mass * self.omega_angular().powi(2)
    }

    pub fn parallel_plate_capacitance(&self) -> f64 {
        VACUUM_PERMITTIVITY * self.area / self.gap
    }

    /// Force on the plate at gap `z` under bias `v`.
    pub fn force(&self, z: f64, v: f64) -> f64 {
        -self.stiffness() * (z - self.gap) - v * v * VACUUM_PERMITTIVITY * self.area / (2.0 * z * z)
    }

    pub fn x_zpf_used(&self) -> f64 {
        self.x_zpf.unwrap_or_else(|| zero_point_motion(self.mass, self.omega_m))
    }
}

/// √(ħ/(2mΩ_m)) with `omega_m` in Hz.
pub fn zero_point_motion(mass: f64, omega_m: f64) -> f64 {
    (HBAR / (2.0 * mass * 2.0 * PI * omega_m)).sqrt()
}

/// Mass implied by a zero-point motion amplitude.
pub fn mass_from_zero_point(x_zpf: f64, omega_m: f64) -> f64 {
    HBAR / (2.0 * 2.0 * PI * omega_m * x_zpf * x_zpf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PullIn {
    /// Bound √(mΩ_m²h³/(ε₀S)).
    pub v_max: f64,
    /// Bias at which the stable equilibrium disappears.
    pub v_pullin: f64,
    /// Gap at the onset of instability.
    pub z_pullin: f64,
}

/// Largest force over the gap and where it occurs. A stable equilibrium
/// exists iff the maximum is non-negative.
fn force_peak(p: &MembraneParams, v: f64) -> (f64, f64) {
    let kh = p.stiffness() * p.gap;
    let (u, f) = golden_max(|u| p.force(u * p.gap, v) / kh, 1e-6, 1.0, 1e-12);
    (u * p.gap, f)
}

/// Stable equilibrium gap under bias `v`, if any.
pub fn stable_equilibrium(p: &MembraneParams, v: f64) -> Result<Option<f64>> {
    p.validate()?;
    if v == 0.0 {
        return Ok(Some(p.gap));
    }
    let (z_peak, f_peak) = force_peak(p, v);
    if f_peak < 0.0 {
        return Ok(None);
    }
    let kh = p.stiffness() * p.gap;
    let u = bisect(|u| p.force(u * p.gap, v) / kh, z_peak / p.gap, 1.0, 1e-14)?;
    Ok(Some(u * p.gap))
}

pub fn pull_in_voltage(p: &MembraneParams) -> Result<PullIn> {
    p.validate()?;
    if force_peak(p, 0.0).1 < 0.0 {
        return Err(Error::param("mass", "no stable equilibrium at zero bias"));
    }
    let v_max = (p.stiffness() * p.gap.powi(3) / (VACUUM_PERMITTIVITY * p.area)).sqrt();
    let v_pullin = bisect(|v| force_peak(p, v).1, 0.0, v_max, 1e-10)?;
    Ok(PullIn {
        v_max,
        v_pullin,
        z_pullin: force_peak(p, v_pullin).0,
    })
}

/// Cooper pairs of charge modulated by the zero-point motion at the bias
/// `p.bias`, with dC/dx = C/h.
pub fn charge_modulation(p: &MembraneParams) -> Result<f64> {
    let pull = pull_in_voltage(p)?;
    if p.bias >= pull.v_pullin {
        return Err(Error::Stability(format!(
            "bias {} V exceeds the pull-in voltage {:.4} V",
            p.bias, pull.v_pullin
        )));
    }
    Ok(p.bias / (2.0 * ELEMENTARY_CHARGE) * p.x_zpf_used() * p.capacitance / p.gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n_drive: f64,
    /// Rabi frequency 2N_drive·ω_ge·|φ_ge|, rad/s.
    pub rabi_angular: f64,
    pub rabi_frequency: f64,
    pub n_min: f64,
    pub strong_coupling: bool,
    /// δq²/(2C) in units of ħ.
    pub energy_sensitivity: f64,
}

/// `omega_ge` in Hz, `delta_q` in e/√Hz.
pub fn coupling_figures(
    n_drive: f64,
    omega_ge: f64,
    phi_matel: f64,
    t1: f64,
    capacitance: f64,
    delta_q: f64,
) -> Result<CouplingReport> {
    require_non_negative("n_drive", n_drive)?;
    require_positive("omega_ge", omega_ge)?;
    require_positive("phi_matel", phi_matel.abs())?;
    require_positive("t1", t1)?;
    require_positive("capacitance", capacitance)?;
    require_non_negative("delta_q", delta_q)?;
    let w = 2.0 * PI * omega_ge;
    let phi = phi_matel.abs();
    let rabi_angular = 2.0 * n_drive * w * phi;
    let dq = delta_q * ELEMENTARY_CHARGE;
    Ok(CouplingReport {
        n_drive,
        rabi_angular,
        rabi_frequency: rabi_angular / (2.0 * PI),
        n_min: 2.0 * PI / (phi * w * t1),
        strong_coupling: rabi_angular * t1 > 2.0 * PI,
        energy_sensitivity: dq * dq / (2.0 * capacitance) / HBAR,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembraneReport {
    pub x_zpf_computed: f64,
    pub x_zpf_table: Option<f64>,
    pub x_zpf_used: f64,
    /// Tabulated over computed, when a table value is given.
    pub x_zpf_ratio: Option<f64>,
    pub pull_in: PullIn,
    pub capacitance_parallel_plate: f64,
    pub capacitance_consistent: bool,
    pub dcdx: f64,
    pub dcdx_parallel_plate: f64,
    pub n_drive: f64,
}

pub fn membrane_report(p: &MembraneParams) -> Result<MembraneReport> {
    p.validate()?;
    let computed = zero_point_motion(p.mass, p.omega_m);
    let c_pp = p.parallel_plate_capacitance();
    let consistent = ((p.capacitance - c_pp) / c_pp).abs() <= CAPACITANCE_TOLERANCE;
    if !consistent {
        log::warn!(
            "capacitance {:.3e} F differs from ε₀S/h = {:.3e} F by more than {:.0}%",
            p.capacitance,
            c_pp,
            100.0 * CAPACITANCE_TOLERANCE
        );
    }
    Ok(MembraneReport {
        x_zpf_computed: computed,
        x_zpf_table: p.x_zpf,
        x_zpf_used: p.x_zpf_used(),
        x_zpf_ratio: p.x_zpf.map(|x| x / computed),
        pull_in: pull_in_voltage(p)?,
        capacitance_parallel_plate: c_pp,
        capacitance_consistent: consistent,
        dcdx: p.capacitance / p.gap,
        dcdx_parallel_plate: VACUUM_PERMITTIVITY * p.area / (p.gap * p.gap),
        n_drive: charge_modulation(p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_point_scaling() {
        let a = zero_point_motion(3e-12, 1.8e6);
        let b = zero_point_motion(12e-12, 1.8e6);
        assert!((a / b - 2.0).abs() < 1e-14);
        let m = mass_from_zero_point(a, 1.8e6);
        assert!((m / 3e-12 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbiased_equilibrium_at_rest_gap() {
        let p = MembraneParams::reference();
        assert_eq!(stable_equilibrium(&p, 0.0).unwrap(), Some(p.gap));
        let z = stable_equilibrium(&p, 5.0).unwrap().unwrap();
        assert!(z < p.gap && z > 2.0 * p.gap / 3.0);
        assert!(p.force(z, 5.0).abs() < 1e-9 * p.stiffness() * p.gap);
    }

    #[test]
    fn pull_in_matches_classic_factor() {
        let p = MembraneParams::reference();
        let pi = pull_in_voltage(&p).unwrap();
        let ratio = pi.v_pullin / pi.v_max;
        assert!((ratio / (8.0f64 / 27.0).sqrt() - 1.0).abs() < 1e-6);
        assert!((pi.z_pullin / p.gap - 2.0 / 3.0).abs() < 1e-4);
        assert!(stable_equilibrium(&p, pi.v_pullin * 1.001).unwrap().is_none());
    }

    #[test]
    fn charge_modulation_linear_and_guarded() {
        let mut p = MembraneParams::reference();
        let n5 = charge_modulation(&p).unwrap();
        p.bias = 10.0;
        let n10 = charge_modulation(&p).unwrap();
        assert!((n10 / n5 - 2.0).abs() < 1e-14);
        p.bias = 0.0;
        assert_eq!(charge_modulation(&p).unwrap(), 0.0);
        p.bias = 20.0;
        assert!(matches!(charge_modulation(&p), Err(Error::Stability(_))));
    }

    #[test]
    fn n_min_monotone() {
        let base = coupling_figures(0.01, 1.8e6, PI, 34e-6, 50e-15, 33e-6).unwrap().n_min;
        assert!(coupling_figures(0.01, 1.8e6, PI, 40e-6, 50e-15, 33e-6).unwrap().n_min < base);
        assert!(coupling_figures(0.01, 2.0e6, PI, 34e-6, 50e-15, 33e-6).unwrap().n_min < base);
        assert!(coupling_figures(0.01, 1.8e6, 3.3, 34e-6, 50e-15, 33e-6).unwrap().n_min < base);
    }

    #[test]
    fn capacitance_mismatch_reported() {
        let r = membrane_report(&MembraneParams::reference()).unwrap();
        assert!(!r.capacitance_consistent);
        assert!(r.x_zpf_ratio.unwrap() > 5.0);
    }
}
