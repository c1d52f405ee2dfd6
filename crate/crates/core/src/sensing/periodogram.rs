use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::protocol::{CalibrationTone, ProtocolConfig, SensorQubit};
use super::record::{scaled_sigma0, simulate_window, telegraph_transform};
use crate::error::{Error, Result};

/// Windows per parallel work unit. Fixed so that floating-point summation
/// order, and hence the result, is independent of the thread pool.
const CHUNK: usize = 32;

/// Shared frequency axis of padded periodograms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub tau: f64,
    pub n_window: usize,
    pub padding: usize,
}

impl Axis {
    fn of(cfg: &ProtocolConfig) -> Self {
        Self {
            tau: cfg.tau(),
            n_window: cfg.n_window,
            padding: cfg.padding,
        }
    }

    pub fn len(&self) -> usize {
        self.n_window * self.padding
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Δ_n = 2πn/(τ N_p N) for the raw FFT index.
    pub fn bin_frequency(&self, n: usize) -> f64 {
        TAU * n as f64 / (self.tau * self.len() as f64)
    }

    /// Same, with indices ≥ M/2 mapped to negative frequencies so the axis
    /// spans [−Ω_Ny, Ω_Ny).
    pub fn centered_frequency(&self, n: usize) -> f64 {
        let m = self.len();
        let signed = if n >= m / 2 { n as f64 - m as f64 } else { n as f64 };
        TAU * signed / (self.tau * m as f64)
    }

    /// Raw index of the bin nearest to angular frequency `omega` (aliased).
    pub fn nearest_bin(&self, omega: f64) -> usize {
        let m = self.len() as f64;
        let x = (omega * self.tau * m / TAU).round();
        x.rem_euclid(m) as usize
    }

    pub fn bin_width_hz(&self) -> f64 {
        1.0 / (self.tau * self.len() as f64)
    }
}

/// |Z_n|² for one zero-padded window.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub axis: Axis,
    pub s: Vec<f64>,
}

/// Bartlett mean of periodograms over non-overlapping windows.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub axis: Axis,
    pub s: Vec<f64>,
    pub n_windows: usize,
}

impl SpectrumEstimate {
    pub fn peak_bin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.s.iter().enumerate() {
            if v > self.s[best] {
                best = i;
            }
        }
        best
    }

    /// Mean of S_n over bins farther than `guard` bins (circularly) from
    /// every bin in `exclude`.
    pub fn mean_excluding(&self, exclude: &[usize], guard: usize) -> f64 {
        let m = self.s.len();
        let far = |i: usize| {
            exclude.iter().all(|&c| {
                let d = (i + m - c) % m;
                d.min(m - d) > guard
            })
        };
        let (sum, count) = self
            .s
            .iter()
            .enumerate()
            .filter(|(i, _)| far(*i))
            .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    }
}

struct Transformer {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Transformer {
    fn new(fft: Arc<dyn Fft<f64>>) -> Self {
        let m = fft.len();
        let s = fft.get_inplace_scratch_len();
        Self {
            fft,
            buf: vec![Complex64::new(0.0, 0.0); m],
            scratch: vec![Complex64::new(0.0, 0.0); s],
        }
    }

    /// Accumulate |FFT(z padded)|² into `acc`.
    fn add_power(&mut self, z: &[Complex64], acc: &mut [f64]) {
        self.buf.fill(Complex64::new(0.0, 0.0));
        self.buf[..z.len()].copy_from_slice(z);
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (a, v) in acc.iter_mut().zip(&self.buf) {
            *a += v.norm_sqr();
        }
    }
}

fn plan(m: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(m)
}

/// Z_n = Σ_k z_k e^{−2πikn/(N_p N)} (no normalization), S_n = |Z_n|².
pub fn periodogram(window: &[Complex64], cfg: &ProtocolConfig) -> Result<Periodogram> {
    cfg.validate()?;
    if window.len() != cfg.n_window {
        return Err(Error::Input(format!(
            "window has {} samples, expected {}",
            window.len(),
            cfg.n_window
        )));
    }
    let axis = Axis::of(cfg);
    let mut s = vec![0.0; axis.len()];
    Transformer::new(plan(axis.len())).add_power(window, &mut s);
    Ok(Periodogram { axis, s })
}

pub fn bartlett_average(periodograms: &[Periodogram]) -> Result<SpectrumEstimate> {
    let first = periodograms
        .first()
        .ok_or_else(|| Error::Input("Bartlett average needs at least one periodogram".into()))?;
    if periodograms.iter().any(|p| p.axis != first.axis) {
        return Err(Error::Input("periodograms have different frequency axes".into()));
    }
    let mut s = vec![0.0; first.s.len()];
    for p in periodograms {
        for (a, v) in s.iter_mut().zip(&p.s) {
            *a += v;
        }
    }
    let n = periodograms.len() as f64;
    s.iter_mut().for_each(|v| *v /= n);
    Ok(SpectrumEstimate {
        axis: first.axis,
        s,
        n_windows: periodograms.len(),
    })
}

/// Simulate `cfg.n_windows` windows and return their Bartlett mean without
/// storing the record. Equal to averaging [`periodogram`] over the windows
/// of [`super::simulate_record`].
pub fn simulate_spectrum(cfg: &ProtocolConfig, tone: &CalibrationTone, qubit: &SensorQubit) -> Result<SpectrumEstimate> {
    cfg.validate()?;
    tone.validate()?;
    qubit.validate()?;
    if cfg.n_windows == 0 {
        return Err(Error::param("n_windows", "need at least one window"));
    }
    let axis = Axis::of(cfg);
    let m = axis.len();
    let sigma = scaled_sigma0(cfg, tone, qubit);
    let fft = plan(m);
    let n_chunks = cfg.n_windows.div_ceil(CHUNK);
    let partial: Vec<Result<Vec<f64>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut tr = Transformer::new(fft.clone());
            let mut acc = vec![0.0; m];
            let mut bits = vec![0u8; cfg.n_window];
            for w in c * CHUNK..((c + 1) * CHUNK).min(cfg.n_windows) {
                simulate_window(sigma, tone.delta, cfg, w, &mut bits)?;
                let z = telegraph_transform(&bits, w * cfg.n_window);
                tr.add_power(&z, &mut acc);
            }
            Ok(acc)
        })
        .collect();
    let mut s = vec![0.0; m];
    for p in partial {
        for (a, v) in s.iter_mut().zip(p?) {
            *a += v;
        }
    }
    let n = cfg.n_windows as f64;
    s.iter_mut().for_each(|v| *v /= n);
    Ok(SpectrumEstimate {
        axis,
        s,
        n_windows: cfg.n_windows,
    })
}
