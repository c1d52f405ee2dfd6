use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use fluxsense::fitting::{
    fit_rabi_curves, fit_ramsey, fit_relaxation, fit_thermal_histogram, pure_dephasing_rate, synthesize_iq,
    synthesize_rabi_curves, temperature_from_populations, Histogram, PeakGuess, PrepFidelity, PrepFidelityFit,
    Preparation, RabiFitOptions, RamseyFit, RelaxationFit, TemperatureEstimate, TemperatureMode,
    ThermalHistogramFit,
};

use super::OperatingPoint;
use crate::config::{linspace, RunConfig};
use crate::error::{CliError, CliResult, Context};
use crate::output::{OutputDir, Table};

#[derive(Serialize)]
struct RabiReport {
    truth: PrepFidelity,
    fit: PrepFidelityFit,
    prep_temperature_truth: TemperatureEstimate,
    prep_temperature_fit: TemperatureEstimate,
}

#[derive(Serialize)]
struct HistogramReport {
    truth_p_ge: f64,
    truth_p_fh: f64,
    fit: ThermalHistogramFit,
    manifold_temperature: Option<TemperatureEstimate>,
}

#[derive(Serialize)]
struct CoherenceReport {
    truth_t1: f64,
    truth_t2_star: f64,
    truth_frequency_hz: f64,
    truth_gamma_phi: f64,
    relaxation: RelaxationFit,
    ramsey: RamseyFit,
    gamma_phi: f64,
}

#[derive(Serialize)]
struct FitdemoReport {
    rabi: RabiReport,
    histogram: HistogramReport,
    coherence: CoherenceReport,
}

pub fn fitdemo(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let f = &cfg.fitdemo;
    let op = OperatingPoint::resolve(cfg)?;
    f.truth.validate().section("fitdemo.truth")?;

    if f.theta_points < 8 {
        return Err(CliError::config("fitdemo.theta_points", "need at least 8 angles"));
    }
    let theta = linspace(0.0, TAU, f.theta_points);
    let data = synthesize_rabi_curves(&f.truth, &theta, f.shots, cfg.stream_seed("rabi")).section("fitdemo")?;
    let fit = fit_rabi_curves(
        &data,
        &RabiFitOptions {
            n_bootstrap: f.bootstrap,
            seed: cfg.stream_seed("bootstrap"),
            ..RabiFitOptions::default()
        },
    )
    .section("fitdemo")?;
    let mut table = Table::new(&["theta_rad", "left_g", "left_e", "left_thermal", "fit_g", "fit_e", "fit_thermal"]);
    for (i, &t) in theta.iter().enumerate() {
        let mut row = vec![t, data.left[0][i], data.left[1][i], data.left[2][i]];
        row.extend(Preparation::ALL.map(|p| fit.estimate.curve(p, t)));
        table.push(row);
    }
    out.write_csv("fitdemo_rabi.csv", &table)?;
    let prep_t = |p: f64| temperature_from_populations(p, op.f_ge, TemperatureMode::TwoLevelPrep).section("fitdemo");
    let rabi = RabiReport {
        truth: f.truth,
        prep_temperature_truth: prep_t(f.truth.prep_g)?,
        prep_temperature_fit: prep_t(fit.estimate.prep_g)?,
        fit,
    };

    let iq = synthesize_iq(f.populations, &f.readout, f.iq_shots, cfg.stream_seed("iq")).section("fitdemo")?;
    let hist = Histogram::for_model(&iq.i, &f.readout).section("fitdemo.readout")?;
    let hfit = fit_thermal_histogram(&hist, Some(PeakGuess::from_model(&f.readout))).section("fitdemo")?;
    let manifold_temperature = if hfit.p_fh > 0.0 {
        Some(temperature_from_populations(hfit.p_ge / hfit.p_fh, f.f_ef, TemperatureMode::Manifold).section("fitdemo")?)
    } else {
        None
    };
    let histogram = HistogramReport {
        truth_p_ge: f.populations[0] + f.populations[1],
        truth_p_fh: f.populations[2] + f.populations[3],
        fit: hfit,
        manifold_temperature,
    };

    let coherence = coherence(cfg)?;
    out.write_json(
        "fitdemo.json",
        &FitdemoReport {
            rabi,
            histogram,
            coherence,
        },
    )
}

/// Relaxation and Ramsey traces of the two-level model with binomial shot
/// noise, and their fits.
fn coherence(cfg: &RunConfig) -> CliResult<CoherenceReport> {
    let f = &cfg.fitdemo;
    for (k, v) in [("t1", f.t1), ("t2_star", f.t2_star), ("ramsey_frequency", f.ramsey_frequency)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::config(&format!("fitdemo.{k}"), format!("must be finite and > 0, got {v}")));
        }
    }
    if f.t2_star > 2.0 * f.t1 {
        return Err(CliError::config("fitdemo.t2_star", "T2* cannot exceed 2 T1"));
    }
    if f.coherence_shots == 0 {
        return Err(CliError::config("fitdemo.coherence_shots", "need at least one shot"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.stream_seed("coherence"));
    let shots = f.coherence_shots;
    let mut sample = |p: f64| -> CliResult<f64> {
        let b = Binomial::new(shots, p.clamp(0.0, 1.0)).map_err(|e| CliError::config("fitdemo", e.to_string()))?;
        Ok(b.sample(&mut rng) as f64 / shots as f64)
    };

    let t_relax = linspace(0.0, 6.0 * f.t1, 200);
    let mut excited = Vec::with_capacity(t_relax.len());
    let mut ground = Vec::with_capacity(t_relax.len());
    for &t in &t_relax {
        let d = 0.5 * (-t / f.t1).exp();
        excited.push(sample(0.5 + d)?);
        ground.push(sample(0.5 - d)?);
    }
    let n_ramsey = ((3.0 * f.t2_star * f.ramsey_frequency * 20.0).ceil() as usize).clamp(200, 20_000);
    let t_ramsey = linspace(0.0, 3.0 * f.t2_star, n_ramsey);
    let mut fringe = Vec::with_capacity(n_ramsey);
    for &t in &t_ramsey {
        fringe.push(sample(0.5 + 0.5 * (-t / f.t2_star).exp() * (TAU * f.ramsey_frequency * t).cos())?);
    }
    let relaxation = fit_relaxation(&t_relax, &excited, &ground).section("fitdemo")?;
    let ramsey = fit_ramsey(&t_ramsey, &fringe).section("fitdemo")?;
    Ok(CoherenceReport {
        truth_t1: f.t1,
        truth_t2_star: f.t2_star,
        truth_frequency_hz: f.ramsey_frequency,
        truth_gamma_phi: pure_dephasing_rate(f.t1, f.t2_star),
        gamma_phi: pure_dephasing_rate(relaxation.t1, ramsey.t2_star),
        relaxation,
        ramsey,
    })
}
