use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::lindblad::{lindblad_evolve, schrodinger_evolve, DensityMatrix, Hamiltonian, LindbladSystem};
use super::qubit::{QubitDissipation, QubitModel};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::linalg::CVector;
use crate::lsq::{levenberg_marquardt, LmOptions};
use crate::ode::{AdaptiveOptions, Stepping};

/// Charge drive H_d(t) = −16·E_C·N·cos(ω_d t)·n̂, so that the resonant Rabi
/// frequency is 2·N·ω_ge·|⟨e|φ̂|g⟩|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveCoupling {
    /// E_C/h in Hz.
    pub e_c: f64,
}

impl DriveCoupling {
    /// Prefactor of cos(ω_d t)·n̂ in rad/s for a drive of `n_drive` Cooper pairs.
    pub fn amplitude(&self, n_drive: f64) -> f64 {
        -16.0 * TAU * self.e_c * n_drive
    }
}

/// P_e(t) of the projected model driven from |g⟩, without the rotating-wave
/// approximation.
pub fn rabi_trace(
    model: &QubitModel,
    drive: DriveCoupling,
    n_drive: f64,
    omega_d: f64,
    times: &[f64],
    dissipation: Option<QubitDissipation>,
    rtol: f64,
) -> Result<Vec<f64>> {
    require_non_negative("n_drive", n_drive)?;
    require_positive("omega_d", omega_d)?;
    let n = model.levels();
    let amp = drive.amplitude(n_drive);
    let h = Hamiltonian::Static(model.diagonal_hamiltonian()).with_term(model.charge(), move |t| amp * (omega_d * t).cos());
    let stepping = Stepping::Adaptive(AdaptiveOptions::with_tolerance(rtol, rtol * 1e-2));
    match dissipation {
        None => {
            let mut psi0 = CVector::zeros(n);
            psi0[0] = Complex64::new(1.0, 0.0);
            let (states, _) = schrodinger_evolve(&h, &psi0, 0.0, times, stepping)?;
            Ok(states.iter().map(|s| s[1].norm_sqr()).collect())
        }
        Some(d) => {
            let system = LindbladSystem::new(h, d.loss_ops(n))?;
            let tr = lindblad_evolve(&system, &DensityMatrix::basis(n, 0), 0.0, times, stepping)?;
            Ok(tr.populations(1))
        }
    }
}

/// Rotating-wave two-level prediction Ω²/W²·sin²(Wt/2), W = √(Ω² + Δ²).
pub fn rwa_trace(omega_r: f64, delta: f64, times: &[f64]) -> Vec<f64> {
    let w2 = omega_r * omega_r + delta * delta;
    times
        .iter()
        .map(|&t| {
            if w2 == 0.0 {
                0.0
            } else {
                omega_r * omega_r / w2 * (0.5 * w2.sqrt() * t).sin().powi(2)
            }
        })
        .collect()
}

/// Fit P(t) = a·(1 − cos Ωt)/2 + c and return Ω. A coarse scan over Ω
/// seeds the least-squares refinement.
pub fn fit_rabi_frequency(times: &[f64], p: &[f64]) -> Result<f64> {
    if times.len() != p.len() || times.len() < 8 {
        return Err(Error::Input("Rabi fit needs ≥ 8 matched samples".into()));
    }
    let span = times[times.len() - 1] - times[0];
    let dt = span / (times.len() - 1) as f64;
    let lo = 0.25 * TAU / span;
    let hi = std::f64::consts::PI / dt;
    let linear_cost = |om: f64| -> (f64, f64, f64) {
        // Least squares for (a, c) at fixed Ω.
        let (mut sxx, mut sx, mut sy, mut sxy, n) = (0.0, 0.0, 0.0, 0.0, times.len() as f64);
        for (t, y) in times.iter().zip(p) {
            let x = 0.5 * (1.0 - (om * t).cos());
            sxx += x * x;
            sx += x;
            sy += y;
            sxy += x * y;
        }
        let det = n * sxx - sx * sx;
        if det.abs() < 1e-300 {
            return (f64::INFINITY, 0.0, 0.0);
        }
        let a = (n * sxy - sx * sy) / det;
        let c = (sy - a * sx) / n;
        let cost: f64 = times
            .iter()
            .zip(p)
            .map(|(t, y)| (a * 0.5 * (1.0 - (om * t).cos()) + c - y).powi(2))
            .sum();
        (cost, a, c)
    };
    let n_scan = 4 * times.len();
    let mut best = (f64::INFINITY, lo, 0.0, 0.0);
    for i in 0..=n_scan {
        let om = lo * (hi / lo).powf(i as f64 / n_scan as f64);
        let (cost, a, c) = linear_cost(om);
        if cost < best.0 {
            best = (cost, om, a, c);
        }
    }
    let om0 = best.1;
    let res = levenberg_marquardt(
        |q| {
            times
                .iter()
                .zip(p)
                .map(|(t, y)| q[1] * 0.5 * (1.0 - (q[0] * om0 * t).cos()) + q[2] - y)
                .collect()
        },
        &[1.0, best.2, best.3],
        LmOptions::default(),
    )?;
    Ok(res.params[0] * om0)
}

#[derive(Debug, Clone)]
pub struct ChevronConfig {
    pub amplitudes: Vec<f64>,
    /// Angular drive frequencies.
    pub drive_frequencies: Vec<f64>,
    pub durations: Vec<f64>,
    pub dissipation: Option<QubitDissipation>,
    pub rtol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChevronMap {
    pub amplitudes: Vec<f64>,
    pub drive_frequencies: Vec<f64>,
    pub durations: Vec<f64>,
    /// `p_excited[amplitude][frequency][duration]`.
    pub p_excited: Vec<Vec<Vec<f64>>>,
}

/// Excited population over amplitude × frequency × duration grids.
pub fn rabi_chevron(model: &QubitModel, drive: DriveCoupling, cfg: &ChevronConfig) -> Result<ChevronMap> {
    if cfg.durations.windows(2).any(|w| w[1] < w[0]) || cfg.durations.iter().any(|&t| t < 0.0) {
        return Err(Error::Input("durations must be non-negative and ascending".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..cfg.amplitudes.len())
        .flat_map(|i| (0..cfg.drive_frequencies.len()).map(move |j| (i, j)))
        .collect();
    let traces: Vec<Result<Vec<f64>>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            rabi_trace(
                model,
                drive,
                cfg.amplitudes[i],
                cfg.drive_frequencies[j],
                &cfg.durations,
                cfg.dissipation,
                cfg.rtol,
            )
        })
        .collect();
    let mut p_excited = vec![vec![Vec::new(); cfg.drive_frequencies.len()]; cfg.amplitudes.len()];
    for (&(i, j), tr) in pairs.iter().zip(traces) {
        p_excited[i][j] = tr?;
    }
    Ok(ChevronMap {
        amplitudes: cfg.amplitudes.clone(),
        drive_frequencies: cfg.drive_frequencies.clone(),
        durations: cfg.durations.clone(),
        p_excited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rabi_fit_on_clean_signal() {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let p: Vec<f64> = t.iter().map(|t| 0.45 * (1.0 - (1.3 * t).cos()) + 0.02).collect();
        let om = fit_rabi_frequency(&t, &p).unwrap();
        assert!((om - 1.3).abs() < 1e-8);
    }

    #[test]
    fn rwa_resonant_flip() {
        let p = rwa_trace(2.0, 0.0, &[std::f64::consts::FRAC_PI_2]);
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert_eq!(rwa_trace(0.0, 0.0, &[1.0])[0], 0.0);
    }
}

#[cfg(test)]
mod device_tests {
    use super::*;
    use crate::circuit::{BasisConfig, CircuitParams, FluxBias, Fluxonium};

    fn model() -> (QubitModel, DriveCoupling, f64) {
        let p = CircuitParams::reference_device();
        let c = Fluxonium::new(p, BasisConfig::new(100).unwrap()).unwrap();
        let m = QubitModel::project(&c, FluxBias::FRUSTRATION, 2).unwrap();
        let phi = m.phase[(1, 0)].abs();
        (m, DriveCoupling { e_c: p.e_c }, phi)
    }

    #[test]
    fn zero_amplitude_leaves_ground_state() {
        let (m, d, _) = model();
        let w = m.omega(0, 1);
        let p = rabi_trace(&m, d, 0.0, w, &[1e-6, 5e-6], None, 1e-9).unwrap();
        assert!(p.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn resonant_rabi_slope() {
        let (m, d, phi) = model();
        let w = m.omega(0, 1);
        let n_drive = 2e-3;
        let want = 2.0 * n_drive * w * phi;
        let period = TAU / want;
        let times: Vec<f64> = (0..=160).map(|i| 2.0 * period * i as f64 / 160.0).collect();
        let p = rabi_trace(&m, d, n_drive, w, &times, None, 1e-9).unwrap();
        let om = fit_rabi_frequency(&times, &p).unwrap();
        assert!((om / want - 1.0).abs() < 0.02, "fitted {om}, expected {want}");
    }
}
