use std::f64::consts::TAU;

use serde::Serialize;

use fluxsense::circuit::FluxBias;
use fluxsense::dynamics::{
    cooling_map, fit_rabi_frequency, flux_ramp, rabi_chevron, rabi_trace, sideband_cooling_compare, steady_preparation,
    ChevronConfig, CoolingMapConfig, CoolingSetup, DriveCoupling, PiecewiseLinear, PreparationEstimate, QubitModel,
    Sideband,
};
use fluxsense::ode::{AdaptiveOptions, Stepping};

use super::{build_circuit, flux_bias, OperatingPoint};
use crate::config::{linspace, RunConfig, SidebandChoice};
use crate::error::{CliError, CliResult, Context};
use crate::output::{OutputDir, Table};

#[derive(Serialize)]
struct CoolSummary {
    compare_flux: f64,
    f_ge_hz: f64,
    c_x: f64,
    /// g|c_x||α|/2π.
    coupling_hz: f64,
    /// g|α|/2π implied by the coupling and c_x.
    g_alpha_hz: f64,
    sideband: SidebandChoice,
    gamma: f64,
    full_rate: f64,
    effective_rate: f64,
    predicted_rate: f64,
    relative_difference: f64,
    steady_state: PreparationEstimate,
    warnings: Vec<String>,
    ramp_final_fidelity: Option<f64>,
}

pub fn cool(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let c = build_circuit(cfg)?;
    let cav = &cfg.cavity;
    let gamma = OperatingPoint::resolve(cfg)?.dissipation.gamma;
    let kappa = TAU * cav.kappa;

    let m = c.matrix_elements(flux_bias("cavity", cav.compare_flux)?).section("cavity")?;
    if m.c_x.abs() < 1e-12 {
        return Err(CliError::config("cavity.compare_flux", "c_x vanishes here; the sideband is not addressable"));
    }
    let g_alpha = TAU * cav.coupling / m.c_x.abs();

    let map = cooling_map(
        &c,
        &CoolingMapConfig {
            flux_grid: cfg.flux.biases().section("flux")?,
            detuning_grid: linspace(cav.detuning_start, cav.detuning_stop, cav.detuning_points)
                .into_iter()
                .map(|d| TAU * d)
                .collect(),
            g_alpha,
            kappa,
            gamma,
        },
    )
    .section("cavity")?;
    let mut table = Table::new(&["phi_ext_rad", "delta_r_Hz", "f_ge_Hz", "c_x", "sigma_z"]);
    for (i, row) in map.sigma_z.iter().enumerate() {
        for (d, s) in map.delta_r.iter().zip(row) {
            table.push(vec![map.phi_ext[i], d / TAU, map.omega_ge[i] / TAU, map.c_x[i], *s]);
        }
    }
    out.write_csv("cool_map.csv", &table)?;

    let setup = CoolingSetup {
        omega_ge: TAU * m.f_ge,
        kappa,
        coupling: TAU * cav.coupling,
        sideband: match cav.sideband {
            SidebandChoice::Raise => Sideband::Raise,
            SidebandChoice::Lower => Sideband::Lower,
        },
        detuning: 0.0,
        gamma,
        fock_levels: cav.fock_levels,
    };
    setup.validate().section("cavity")?;
    let total_rate = setup.predicted_rate() + 2.0 * gamma;
    let duration = match cav.duration {
        Some(d) => d,
        None if total_rate > 0.0 => 5.0 / total_rate,
        None => return Err(CliError::config("cavity.duration", "no relaxation at this point; give a duration")),
    };
    let cmp = sideband_cooling_compare(&setup, duration, cav.samples).section("cavity")?;
    let mut trace = Table::new(&["time_s", "p_initial_full", "p_initial_effective"]);
    for ((t, f), e) in cmp.times.iter().zip(&cmp.full).zip(&cmp.effective) {
        trace.push(vec![*t, *f, *e]);
    }
    out.write_csv("cool_trace.csv", &trace)?;

    let ramp_final_fidelity = match &cfg.ramp {
        Some(r) => Some(ramp(cfg, &c, r, out)?),
        None => None,
    };
    out.write_json(
        "cool.json",
        &CoolSummary {
            compare_flux: cav.compare_flux,
            f_ge_hz: m.f_ge,
            c_x: m.c_x,
            coupling_hz: cav.coupling,
            g_alpha_hz: g_alpha / TAU,
            sideband: cav.sideband,
            gamma,
            full_rate: cmp.full_rate,
            effective_rate: cmp.effective_rate,
            predicted_rate: cmp.predicted_rate,
            relative_difference: cmp.relative_difference,
            steady_state: steady_preparation(setup.predicted_rate(), gamma).section("cavity")?,
            warnings: cmp.warnings,
            ramp_final_fidelity,
        },
    )
}

fn ramp(
    cfg: &RunConfig,
    c: &fluxsense::circuit::Fluxonium,
    r: &crate::config::RampSection,
    out: &mut OutputDir,
) -> CliResult<f64> {
    let schedule = PiecewiseLinear::new(r.points.iter().map(|&(t, f)| (t, TAU * f)).collect()).section("ramp")?;
    let reference = FluxBias::new(schedule.points[0].1).section("ramp")?;
    let model = QubitModel::project(c, reference, r.levels).section("ramp")?;
    let t0 = schedule.points[0].0;
    let times = linspace(t0, schedule.end_time(), r.samples);
    let dissipation = r
        .dissipation
        .then(|| OperatingPoint::resolve(cfg).map(|op| op.dissipation))
        .transpose()?;
    let stepping = Stepping::Adaptive(AdaptiveOptions::with_tolerance(1e-8, 1e-10));
    let rep = flux_ramp(&model, &schedule, dissipation, r.initial_level, &times, stepping).section("ramp")?;
    let mut cols = vec!["time_s".to_string(), "phi_ext_rad".to_string(), "adiabatic_fidelity".to_string()];
    cols.extend((0..r.levels).map(|k| format!("p_{k}")));
    let mut table = Table::new(&cols);
    for i in 0..rep.times.len() {
        let mut row = vec![rep.times[i], rep.phi_ext[i], rep.adiabatic_fidelity[i]];
        row.extend(&rep.populations[i]);
        table.push(row);
    }
    out.write_csv("cool_ramp.csv", &table)?;
    Ok(rep.adiabatic_fidelity.last().copied().unwrap_or(f64::NAN))
}

#[derive(Serialize)]
struct RabiSlope {
    n_drive: f64,
    /// 2·N·ω_ge·|⟨e|φ̂|g⟩| / 2π.
    predicted_hz: f64,
    fitted_hz: f64,
}

#[derive(Serialize)]
struct ChevronSummary {
    f_ge_hz: f64,
    phi_ge: f64,
    levels: usize,
    resonant: Vec<RabiSlope>,
}

pub fn chevron(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let c = build_circuit(cfg)?;
    let ch = &cfg.chevron;
    let model = QubitModel::project(&c, flux_bias("qubit", cfg.qubit.flux)?, ch.levels).section("chevron")?;
    let omega_ge = model.omega(0, 1);
    let phi_ge = model.phase[(1, 0)].abs();
    let drive = DriveCoupling { e_c: c.params.e_c };
    let detunings = linspace(-ch.detuning_span / 2.0, ch.detuning_span / 2.0, ch.detuning_points);
    let dissipation = ch
        .dissipation
        .then(|| OperatingPoint::resolve(cfg).map(|op| op.dissipation))
        .transpose()?;
    let map = rabi_chevron(
        &model,
        drive,
        &ChevronConfig {
            amplitudes: ch.n_drive.clone(),
            drive_frequencies: detunings.iter().map(|d| omega_ge + TAU * d).collect(),
            durations: linspace(0.0, ch.duration, ch.duration_points),
            dissipation,
            rtol: ch.rtol,
        },
    )
    .section("chevron")?;
    let mut table = Table::new(&["n_drive", "drive_detuning_Hz", "duration_s", "p_excited"]);
    for (i, n) in map.amplitudes.iter().enumerate() {
        for (j, d) in detunings.iter().enumerate() {
            for (k, t) in map.durations.iter().enumerate() {
                table.push(vec![*n, *d, *t, map.p_excited[i][j][k]]);
            }
        }
    }
    out.write_csv("chevron.csv", &table)?;

    let mut resonant = Vec::new();
    for &n in &ch.n_drive {
        let predicted = 2.0 * n * omega_ge * phi_ge;
        let fitted = if predicted > 0.0 {
            let period = TAU / predicted;
            let times = linspace(0.0, 2.0 * period, 161);
            let p = rabi_trace(&model, drive, n, omega_ge, &times, None, ch.rtol).section("chevron")?;
            fit_rabi_frequency(&times, &p).section("chevron")?
        } else {
            0.0
        };
        resonant.push(RabiSlope {
            n_drive: n,
            predicted_hz: predicted / TAU,
            fitted_hz: fitted / TAU,
        });
    }
    out.write_json(
        "chevron.json",
        &ChevronSummary {
            f_ge_hz: omega_ge / TAU,
            phi_ge,
            levels: ch.levels,
            resonant,
        },
    )
}
