use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::cavity::effective_loss_rates;
use super::lindblad::{lindblad_evolve, DensityMatrix, Hamiltonian, LindbladSystem};
use crate::circuit::{FluxBias, Fluxonium};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::linalg::{annihilation, ket_bra, kron, CMatrix};
use crate::lsq::{levenberg_marquardt, LmOptions};
use crate::ode::{AdaptiveOptions, Stepping};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sideband {
    /// σ⁺ process, resonant at Δ_R = −ω_ge; prepares |e⟩.
    Raise,
    /// σ⁻ process, resonant at Δ_R = +ω_ge; prepares |g⟩.
    Lower,
}

/// One sideband process of the displaced, rotating-wave qubit–cavity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoolingSetup {
    pub omega_ge: f64,
    pub kappa: f64,
    /// g|c_x||α|.
    pub coupling: f64,
    pub sideband: Sideband,
    /// Detuning from the addressed sideband, Δ_R^±.
    pub detuning: f64,
    /// Symmetric thermal qubit rate Γ.
    pub gamma: f64,
    pub fock_levels: usize,
}

impl CoolingSetup {
    pub fn validate(&self) -> Result<()> {
        require_positive("omega_ge", self.omega_ge)?;
        require_positive("kappa", self.kappa)?;
        require_non_negative("coupling", self.coupling)?;
        require_non_negative("gamma", self.gamma)?;
        if self.fock_levels < 2 {
            return Err(Error::param("fock_levels", "need at least 2 Fock states"));
        }
        Ok(())
    }

    /// Effective rate of the addressed channel.
    pub fn predicted_rate(&self) -> f64 {
        let c = self.coupling;
        c * c * self.kappa / (self.detuning * self.detuning + 0.25 * self.kappa * self.kappa)
    }

    fn initial_qubit_level(&self) -> usize {
        match self.sideband {
            Sideband::Lower => 1,
            Sideband::Raise => 0,
        }
    }

    fn regime_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let resolution = 2.0 * self.omega_ge / self.kappa;
        if resolution < 5.0 {
            w.push(format!("sideband not resolved: 2 omega_ge / kappa = {resolution:.3} < 5"));
        }
        let eps = self.coupling / self.kappa;
        if eps > 0.05 {
            w.push(format!("cavity not adiabatic: coupling / kappa = {eps:.4} > 0.05"));
        }
        w
    }
}

fn thermal_ops(gamma: f64, embed: impl Fn(CMatrix) -> CMatrix) -> Vec<CMatrix> {
    if gamma <= 0.0 {
        return Vec::new();
    }
    let s = Complex64::new(gamma.sqrt(), 0.0);
    vec![embed(ket_bra(2, 1, 0) * s), embed(ket_bra(2, 0, 1) * s)]
}

fn solver() -> Stepping {
    Stepping::Adaptive(AdaptiveOptions::with_tolerance(1e-9, 1e-11))
}

/// Population of the initial qubit level under the full qubit ⊗ cavity model
/// H = Δ a†a + c(σ^± a† + σ^∓ a) with cavity decay κ.
pub fn full_cooling_trace(setup: &CoolingSetup, times: &[f64]) -> Result<Vec<f64>> {
    setup.validate()?;
    let nc = setup.fock_levels;
    let a = annihilation(nc);
    let id_q = CMatrix::identity(2, 2);
    let id_c = CMatrix::identity(nc, nc);
    let (sp, sm) = (ket_bra(2, 1, 0), ket_bra(2, 0, 1));
    let (s_create, s_annihilate) = match setup.sideband {
        Sideband::Raise => (sp, sm),
        Sideband::Lower => (sm, sp),
    };
    let num = kron(&id_q, &(a.adjoint() * &a));
    let c = Complex64::new(setup.coupling, 0.0);
    let h = num * Complex64::new(setup.detuning, 0.0)
        + (kron(&s_create, &a.adjoint()) + kron(&s_annihilate, &a)) * c;
    let mut losses = vec![kron(&id_q, &a) * Complex64::new(setup.kappa.sqrt(), 0.0)];
    losses.extend(thermal_ops(setup.gamma, |m| kron(&m, &id_c)));

    let q0 = setup.initial_qubit_level();
    let system = LindbladSystem::new(Hamiltonian::Static(h), losses)?;
    let rho0 = DensityMatrix::basis(2 * nc, q0 * nc);
    let tr = lindblad_evolve(&system, &rho0, 0.0, times, solver())?;
    Ok(tr
        .states
        .iter()
        .map(|r| r.trace_out_second(2, nc)[(q0, q0)].re)
        .collect())
}

/// Same population under the two-level model with the eliminated-cavity
/// loss operator and thermal rates.
pub fn effective_cooling_trace(setup: &CoolingSetup, times: &[f64]) -> Result<Vec<f64>> {
    setup.validate()?;
    let rate = Complex64::new(setup.predicted_rate().sqrt(), 0.0);
    let l = match setup.sideband {
        Sideband::Raise => ket_bra(2, 1, 0),
        Sideband::Lower => ket_bra(2, 0, 1),
    } * rate;
    let mut losses = vec![l];
    losses.extend(thermal_ops(setup.gamma, |m| m));
    let q0 = setup.initial_qubit_level();
    let system = LindbladSystem::new(Hamiltonian::Static(CMatrix::zeros(2, 2)), losses)?;
    let tr = lindblad_evolve(&system, &DensityMatrix::basis(2, q0), 0.0, times, solver())?;
    Ok(tr.populations(q0))
}

/// Fit y = A·e^{−rt} + B and return (r, A, B).
pub fn fit_exponential_rate(times: &[f64], values: &[f64]) -> Result<(f64, f64, f64)> {
    if times.len() != values.len() || times.len() < 4 {
        return Err(Error::Input("exponential fit needs ≥ 4 matched samples".into()));
    }
    let (y0, y1) = (values[0], values[values.len() - 1]);
    let amp = y0 - y1;
    if amp.abs() < 1e-12 {
        return Ok((0.0, 0.0, y1));
    }
    let target = y1 + amp / std::f64::consts::E;
    let idx = values
        .iter()
        .position(|&v| (v - target) * amp.signum() <= 0.0)
        .unwrap_or(values.len() - 1)
        .max(1);
    let r0 = 1.0 / (times[idx] - times[0]).max(f64::MIN_POSITIVE);
    let scale = r0;
    let res = levenberg_marquardt(
        |p| {
            times
                .iter()
                .zip(values)
                .map(|(t, y)| p[1] * (-(p[0] * scale) * (t - times[0])).exp() + p[2] - y)
                .collect()
        },
        &[1.0, amp, y1],
        LmOptions::default(),
    )?;
    let p = res.params;
    Ok((p[0] * scale, p[1] * (p[0] * scale * times[0]).exp(), p[2]))
}

#[derive(Debug, Clone, Serialize)]
pub struct CoolingComparison {
    pub times: Vec<f64>,
    pub full: Vec<f64>,
    pub effective: Vec<f64>,
    /// Fitted decay exponents; both include the thermal 2Γ.
    pub full_rate: f64,
    pub effective_rate: f64,
    /// Effective-model exponent r + 2Γ.
    pub predicted_rate: f64,
    pub relative_difference: f64,
    pub warnings: Vec<String>,
}

/// Run the full and eliminated-cavity models side by side over `duration`
/// and compare their fitted relaxation rates.
pub fn sideband_cooling_compare(setup: &CoolingSetup, duration: f64, n_points: usize) -> Result<CoolingComparison> {
    require_positive("duration", duration)?;
    if n_points < 4 {
        return Err(Error::param("n_points", "need at least 4 samples"));
    }
    let warnings = setup.regime_warnings();
    for w in &warnings {
        log::warn!("{w}");
    }
    let times: Vec<f64> = (0..n_points).map(|i| duration * i as f64 / (n_points - 1) as f64).collect();
    let full = full_cooling_trace(setup, &times)?;
    let effective = effective_cooling_trace(setup, &times)?;
    // Skip the first few cavity lifetimes of the full model, where the
    // cavity field is still building up.
    let t_skip = 5.0 / setup.kappa;
    let start = times.iter().position(|&t| t >= t_skip).unwrap_or(0).min(n_points - 4);
    let (full_rate, _, _) = fit_exponential_rate(&times[start..], &full[start..])?;
    let (effective_rate, _, _) = fit_exponential_rate(&times, &effective)?;
    let predicted_rate = setup.predicted_rate() + 2.0 * setup.gamma;
    Ok(CoolingComparison {
        relative_difference: if effective_rate > 0.0 {
            (full_rate - effective_rate).abs() / effective_rate
        } else {
            full_rate.abs()
        },
        times,
        full,
        effective,
        full_rate,
        effective_rate,
        predicted_rate,
        warnings,
    })
}

/// Steady state of the rate equations with one sideband rate `rate` and
/// symmetric thermal rate Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreparationEstimate {
    /// 1/(r + 2Γ).
    pub time_constant: f64,
    /// (r + Γ)/(r + 2Γ), the exact stationary population.
    pub fidelity: f64,
    /// r/(r + Γ), the leading-order estimate.
    pub fidelity_leading_order: f64,
}

pub fn steady_preparation(rate: f64, gamma: f64) -> Result<PreparationEstimate> {
    require_non_negative("rate", rate)?;
    require_non_negative("gamma", gamma)?;
    if rate + gamma == 0.0 {
        return Err(Error::param("rate", "rate and gamma cannot both vanish"));
    }
    Ok(PreparationEstimate {
        time_constant: 1.0 / (rate + 2.0 * gamma),
        fidelity: (rate + gamma) / (rate + 2.0 * gamma),
        fidelity_leading_order: rate / (rate + gamma),
    })
}

#[derive(Debug, Clone)]
pub struct CoolingMapConfig {
    pub flux_grid: Vec<FluxBias>,
    /// Δ_R values.
    pub detuning_grid: Vec<f64>,
    /// g|α|, held fixed at every point.
    pub g_alpha: f64,
    pub kappa: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoolingMap {
    pub phi_ext: Vec<f64>,
    pub delta_r: Vec<f64>,
    /// Angular ω_ge and c_x per flux point.
    pub omega_ge: Vec<f64>,
    pub c_x: Vec<f64>,
    /// `sigma_z[flux][detuning]`, stationary ⟨σ_z⟩ = P_e − P_g.
    pub sigma_z: Vec<Vec<f64>>,
}

/// Stationary ⟨σ_z⟩ from the effective rates over a flux × detuning grid.
pub fn cooling_map(circuit: &Fluxonium, cfg: &CoolingMapConfig) -> Result<CoolingMap> {
    require_positive("kappa", cfg.kappa)?;
    require_non_negative("g_alpha", cfg.g_alpha)?;
    require_non_negative("gamma", cfg.gamma)?;
    let rows: Vec<Result<(f64, f64, Vec<f64>)>> = cfg
        .flux_grid
        .par_iter()
        .map(|&flux| {
            let m = circuit.matrix_elements(flux)?;
            let omega_ge = std::f64::consts::TAU * m.f_ge;
            let row = cfg
                .detuning_grid
                .iter()
                .map(|&d| {
                    let r = effective_loss_rates(m.c_x, cfg.g_alpha, Complex64::new(1.0, 0.0), cfg.kappa, d, omega_ge)?;
                    let up = r.rate_raise + cfg.gamma;
                    let down = r.rate_lower + cfg.gamma;
                    Ok(if up + down > 0.0 { (up - down) / (up + down) } else { 0.0 })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((omega_ge, m.c_x, row))
        })
        .collect();
    let mut out = CoolingMap {
        phi_ext: cfg.flux_grid.iter().map(|f| f.radians()).collect(),
        delta_r: cfg.detuning_grid.clone(),
        omega_ge: Vec::new(),
        c_x: Vec::new(),
        sigma_z: Vec::new(),
    };
    for r in rows {
        let (w, c, row) = r?;
        out.omega_ge.push(w);
        out.c_x.push(c);
        out.sigma_z.push(row);
    }
    Ok(out)
}
