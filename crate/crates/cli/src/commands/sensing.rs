use std::f64::consts::TAU;

use serde::Serialize;

use fluxsense::sensing::{
    calibrate_spectrum, optimal_ideal, predicted_peaks, sensitivity_curve, simulate_record, simulate_spectrum, snr_in_band,
    snr_predict, CalibrationTone, Scenario,
};

use super::{protocol, OperatingPoint};
use crate::config::{linspace, RunConfig};
use crate::error::{CliResult, Context};
use crate::output::{OutputDir, Table};

#[derive(Serialize)]
struct Calibration {
    snr: f64,
    delta_q_e_per_rthz: f64,
    peak_frequency_hz: f64,
    scale_e2_per_hz: f64,
    floor_e2_per_hz: f64,
}

#[derive(Serialize)]
struct SenseSummary {
    qubit: OperatingPoint,
    tone_n_drive: f64,
    tone_delta_hz: f64,
    tone_phase: f64,
    n_windows: usize,
    nyquist_hz: f64,
    rbw_hz: f64,
    predicted_peaks_hz: [f64; 2],
    peak_bin_frequency_hz: f64,
    floor: f64,
    floor_expected: f64,
    snr_predicted: f64,
    snr_in_band: f64,
    calibration: Option<Calibration>,
}

pub fn sense(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let op = OperatingPoint::resolve(cfg)?;
    let q = op.sensor();
    let pc = protocol(cfg, cfg.stream_seed("sense"))?;
    let tone = CalibrationTone {
        n_drive: cfg.tone.n_drive,
        delta: TAU * cfg.tone.delta,
        phase: cfg.tone.phase,
    };
    tone.validate().section("tone")?;
    let est = simulate_spectrum(&pc, &tone, &q).section("sense")?;
    let calibration = if tone.n_drive > 0.0 {
        Some(calibrate_spectrum(&est, &tone).section("tone")?)
    } else {
        None
    };

    let m = est.s.len();
    let order = (m / 2..m).chain(0..m / 2);
    let mut table = match calibration {
        Some(_) => Table::new(&["freq_Hz", "s_n", "s_ee_e2_per_Hz"]),
        None => Table::new(&["freq_Hz", "s_n"]),
    };
    for n in order {
        let mut row = vec![est.axis.centered_frequency(n) / TAU, est.s[n]];
        if let Some(c) = &calibration {
            row.push(c.s_ee[n]);
        }
        table.push(row);
    }
    out.write_csv("sense_spectrum.csv", &table)?;

    if cfg.sense.raw_record {
        let rec = simulate_record(&pc, &tone, &q).section("sense")?;
        let mut buf = Vec::new();
        rec.write_packed(&mut buf).expect("writing to a buffer");
        out.write_bytes("sense_record.bin", &buf)?;
    }

    let peak = est.peak_bin();
    let nyquist = pc.nyquist();
    let floor = match &calibration {
        Some(c) => c.floor,
        None => est.s.iter().sum::<f64>() / m as f64,
    };
    out.write_json(
        "sense.json",
        &SenseSummary {
            qubit: op,
            tone_n_drive: tone.n_drive,
            tone_delta_hz: cfg.tone.delta,
            tone_phase: tone.phase,
            n_windows: est.n_windows,
            nyquist_hz: nyquist / TAU,
            rbw_hz: pc.rbw() / TAU,
            predicted_peaks_hz: predicted_peaks(tone.delta, &pc).map(|w| w / TAU),
            peak_bin_frequency_hz: est.axis.centered_frequency(peak) / TAU,
            floor,
            floor_expected: pc.n_window as f64 / 4.0,
            snr_predicted: snr_predict(&pc, &tone, &q),
            snr_in_band: snr_in_band(&pc, tone.n_drive, &q),
            calibration: calibration.map(|c| Calibration {
                snr: c.snr,
                delta_q_e_per_rthz: c.delta_q,
                peak_frequency_hz: c.peak_frequency / TAU,
                scale_e2_per_hz: c.scale,
                floor_e2_per_hz: c.floor_ee,
            }),
        },
    )
}

#[derive(Serialize)]
struct Optimum {
    tau_i: f64,
    delta_q_e_per_rthz: f64,
}

#[derive(Serialize)]
struct SensitivitySummary {
    qubit: OperatingPoint,
    tau_prep: f64,
    ideal: Optimum,
    fixed_prep: Optimum,
    ideal_closed_form: Optimum,
}

pub fn sensitivity(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let op = OperatingPoint::resolve(cfg)?;
    let s = &cfg.sensitivity;
    let grid = linspace(s.tau_i_start, s.tau_i_stop, s.points);
    let omega = TAU * op.f_ge;
    let tau_prep = cfg.protocol.tau_prep;
    let ideal = sensitivity_curve(op.t1, omega, op.phi_ge, Scenario::Ideal, tau_prep, &grid).section("sensitivity")?;
    let fixed = sensitivity_curve(op.t1, omega, op.phi_ge, Scenario::FixedPrep, tau_prep, &grid).section("sensitivity")?;
    let mut table = Table::new(&["tau_i_s", "delta_q_ideal_e_per_rtHz", "delta_q_fixed_prep_e_per_rtHz"]);
    for (i, t) in grid.iter().enumerate() {
        table.push(vec![*t, ideal.delta_q[i], fixed.delta_q[i]]);
    }
    out.write_csv("sensitivity.csv", &table)?;
    let (tau_cf, dq_cf) = optimal_ideal(op.t1, omega, op.phi_ge);
    out.write_json(
        "sensitivity.json",
        &SensitivitySummary {
            qubit: op,
            tau_prep,
            ideal: Optimum {
                tau_i: ideal.tau_i_opt,
                delta_q_e_per_rthz: ideal.delta_q_min,
            },
            fixed_prep: Optimum {
                tau_i: fixed.tau_i_opt,
                delta_q_e_per_rthz: fixed.delta_q_min,
            },
            ideal_closed_form: Optimum {
                tau_i: tau_cf,
                delta_q_e_per_rthz: dq_cf,
            },
        },
    )
}
