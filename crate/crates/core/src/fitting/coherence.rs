use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationFit {
    pub t1: f64,
    /// Up/down rate Γ = 1/(2T1).
    pub gamma: f64,
    pub asymptote: f64,
    pub amplitude_excited: f64,
    pub amplitude_ground: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyFit {
    pub t2_star: f64,
    /// Fringe frequency, Hz.
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub cost: f64,
}

fn check_trace(times: &[f64], traces: &[&[f64]]) -> Result<()> {
    if times.len() < 6 {
        return Err(Error::Input("need at least six samples".into()));
    }
    if traces.iter().any(|y| y.len() != times.len()) {
        return Err(Error::Input("trace length differs from time axis".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Linear least squares for fixed nonlinear parameters; returns the
/// coefficients and the residual sum of squares.
fn linear_solve(basis: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let c = basis.clone().svd(true, true).solve(y, 1e-12).ok()?;
    let r = basis * &c - y;
    Some((c, r.norm_squared()))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
}

/// Joint fit of relaxation traces from |e⟩ and |g⟩ toward a shared
/// asymptote with a shared rate 1/T1.
pub fn fit_relaxation(times: &[f64], excited: &[f64], ground: &[f64]) -> Result<RelaxationFit> {
    check_trace(times, &[excited, ground])?;
    let n = times.len();
    let t0 = times[0];
    let span = times[n - 1] - t0;

    let y = DVector::from_iterator(2 * n, excited.iter().chain(ground).cloned());
    let basis_for = |rate: f64| {
        DMatrix::from_fn(2 * n, 3, |row, col| {
            let k = row % n;
            let decay = (-(times[k] - t0) * rate).exp();
            match col {
                0 => 1.0,
                1 if row < n => decay,
                2 if row >= n => decay,
                _ => 0.0,
            }
        })
    };
    let mut best = (f64::INFINITY, 1.0 / span);
    for rate in log_grid(0.01 / span, 100.0 / span, 200) {
        if let Some((_, rss)) = linear_solve(&basis_for(rate), &y) {
            if rss < best.0 {
                best = (rss, rate);
            }
        }
    }
    let (c, _) = linear_solve(&basis_for(best.1), &y).ok_or_else(|| Error::Numerical("singular relaxation basis".into()))?;

    let scale = span;
    let p0 = [(best.1 * scale).ln(), c[0], c[1], c[2]];
    let res = levenberg_marquardt(
        |p| {
            let rate = p[0].exp() / scale;
            let mut r = Vec::with_capacity(2 * n);
            for (amp, trace) in [(p[2], excited), (p[3], ground)] {
                for (t, yv) in times.iter().zip(trace) {
                    r.push(p[1] + amp * (-(t - t0) * rate).exp() - yv);
                }
            }
            r
        },
        &p0,
        LmOptions::default(),
    )?;
    let p = &res.params;
    let t1 = scale / p[0].exp();
    Ok(RelaxationFit {
        t1,
        gamma: 0.5 / t1,
        asymptote: p[1],
        amplitude_excited: p[2],
        amplitude_ground: p[3],
        cost: res.cost,
    })
}

/// Dominant nonzero frequency (Hz) of a uniformly sampled trace from a
/// zero-padded FFT with parabolic peak interpolation.
pub fn dominant_frequency(times: &[f64], y: &[f64]) -> Result<f64> {
    check_trace(times, &[y])?;
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let mean = y.iter().sum::<f64>() / n as f64;
    let len = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = (0..len)
        .map(|k| Complex64::new(if k < n { y[k] - mean } else { 0.0 }, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let power: Vec<f64> = buf[..len / 2].iter().map(|c| c.norm_sqr()).collect();
    let k = (1..len / 2 - 1)
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .ok_or_else(|| Error::Numerical("trace too short for a frequency estimate".into()))?;
    let (a, b, c) = (power[k - 1].sqrt(), power[k].sqrt(), power[k + 1].sqrt());
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Ok((k as f64 + shift) / (len as f64 * dt))
}

/// Exponentially damped sinusoid fit, offset + A e^{−t/T2*} cos(2πft + φ).
/// Samples must be uniformly spaced for the frequency guess.
pub fn fit_ramsey(times: &[f64], signal: &[f64]) -> Result<RamseyFit> {
    let f0 = dominant_frequency(times, signal)?;
    let n = times.len();
    let t0 = times[0];
    let span = times[n - 1] - t0;
    let y = DVector::from_column_slice(signal);
    let basis_for = |rate: f64, f: f64| {
        DMatrix::from_fn(n, 3, |k, col| {
            let t = times[k] - t0;
            let d = (-t * rate).exp();
            let w = 2.0 * std::f64::consts::PI * f * t;
            match col {
                0 => 1.0,
                1 => d * w.cos(),
                _ => -d * w.sin(),
            }
        })
    };
    let mut best = (f64::INFINITY, 1.0 / span);
    for rate in log_grid(0.01 / span, 100.0 / span, 200) {
        if let Some((_, rss)) = linear_solve(&basis_for(rate, f0), &y) {
            if rss < best.0 {
                best = (rss, rate);
            }
        }
    }
    let (c, _) = linear_solve(&basis_for(best.1, f0), &y).ok_or_else(|| Error::Numerical("singular Ramsey basis".into()))?;
    let amp0 = c[1].hypot(c[2]);
    let phase0 = c[2].atan2(c[1]);

    let p0 = [c[0], amp0, (best.1 * span).ln(), f0 * span, phase0];
    let res = levenberg_marquardt(
        |p| {
            let rate = p[2].exp() / span;
            let f = p[3] / span;
            times
                .iter()
                .zip(signal)
                .map(|(t, yv)| {
                    let t = t - t0;
                    p[0] + p[1] * (-t * rate).exp() * (2.0 * std::f64::consts::PI * f * t + p[4]).cos() - yv
                })
                .collect()
        },
        &p0,
        LmOptions::default(),
    )?;
    let p = &res.params;
    let (amplitude, phase) = if p[1] < 0.0 {
        (-p[1], p[4] + std::f64::consts::PI)
    } else {
        (p[1], p[4])
    };
    Ok(RamseyFit {
        t2_star: span / p[2].exp(),
        frequency: p[3] / span,
        amplitude,
        phase: phase.rem_euclid(2.0 * std::f64::consts::PI),
        offset: p[0],
        cost: res.cost,
    })
}

/// Pure-dephasing rate 1/T2* − 1/(2T1), in 1/s.
pub fn pure_dephasing_rate(t1: f64, t2_star: f64) -> f64 {
    1.0 / t2_star - 0.5 / t1
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn noiseless_relaxation_exact() {
        let t1 = 34e-6;
        let times: Vec<f64> = (0..120).map(|k| k as f64 * 1.5e-6).collect();
        let e: Vec<f64> = times.iter().map(|t| 0.5 + 0.45 * (-t / t1).exp()).collect();
        let g: Vec<f64> = times.iter().map(|t| 0.5 - 0.47 * (-t / t1).exp()).collect();
        let fit = fit_relaxation(&times, &e, &g).unwrap();
        assert!((fit.t1 / t1 - 1.0).abs() < 1e-8);
        assert!((fit.asymptote - 0.5).abs() < 1e-8);
        assert!((fit.amplitude_ground + 0.47).abs() < 1e-8);
    }

    #[test]
    fn noiseless_ramsey_exact() {
        let (t2, f) = (39.7e-6, 1.8e6);
        let times: Vec<f64> = (0..3000).map(|k| k as f64 * 40e-9).collect();
        let y: Vec<f64> = times
            .iter()
            .map(|t| 0.5 + 0.42 * (-t / t2).exp() * (2.0 * PI * f * t + 0.3).cos())
            .collect();
        let fit = fit_ramsey(&times, &y).unwrap();
        assert!((fit.t2_star / t2 - 1.0).abs() < 1e-7);
        assert!((fit.frequency / f - 1.0).abs() < 1e-9);
        assert!((fit.phase - 0.3).abs() < 1e-6);
    }

    #[test]
    fn fft_guess_close() {
        let times: Vec<f64> = (0..500).map(|k| k as f64 * 1e-7).collect();
        let y: Vec<f64> = times.iter().map(|t| (2.0 * PI * 1.23e6 * t).sin()).collect();
        let f = dominant_frequency(&times, &y).unwrap();
        assert!((f - 1.23e6).abs() < 2e3, "{f}");
    }

    #[test]
    fn dephasing_identity() {
        let r = pure_dephasing_rate(34e-6, 39.7e-6);
        assert!((1.0 / r - 95.4e-6).abs() < 0.1e-6);
        let t1 = 50e-6;
        assert!(pure_dephasing_rate(t1, 2.0 * t1).abs() < 1e-12 / t1);
    }
}
