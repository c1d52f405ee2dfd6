use rayon::prelude::*;
use serde::Serialize;

use super::periodogram::{simulate_spectrum, SpectrumEstimate};
use super::protocol::{CalibrationTone, ProtocolConfig, SensorQubit};
use crate::error::Result;

fn wrap(x: f64, nyquist: f64) -> f64 {
    (x + nyquist).rem_euclid(2.0 * nyquist) - nyquist
}

/// The two aliased peak positions Δ and Ω_Ny − Δ, folded into [−Ω_Ny, Ω_Ny).
pub fn predicted_peaks(delta: f64, cfg: &ProtocolConfig) -> [f64; 2] {
    let ny = cfg.nyquist();
    [wrap(delta, ny), wrap(ny - delta, ny)]
}

#[derive(Debug, Clone, Serialize)]
pub struct AliasPoint {
    pub delta: f64,
    pub predicted: [f64; 2],
    pub predicted_bins: [usize; 2],
    /// Strongest bin and strongest bin outside its main lobe.
    pub simulated_bins: [usize; 2],
    /// Whether both loci were found within one bin; `None` when the two
    /// loci are too close (under 4 Ω_RBW) to be told apart.
    pub matched: Option<bool>,
}

fn circular(a: usize, b: usize, m: usize) -> usize {
    let d = (a + m - b) % m;
    d.min(m - d)
}

fn two_peaks(est: &SpectrumEstimate, guard: usize) -> [usize; 2] {
    let m = est.s.len();
    let first = est.peak_bin();
    let mut second = (first + m / 2) % m;
    for (i, &v) in est.s.iter().enumerate() {
        if circular(i, first, m) > guard && v > est.s[second] {
            second = i;
        }
    }
    [first, second]
}

/// Simulated spectrogram peaks against the predicted aliasing loci, one
/// spectrum of `cfg.n_windows` windows per detuning.
pub fn aliasing_map(
    cfg: &ProtocolConfig,
    n_drive: f64,
    qubit: &SensorQubit,
    deltas: &[f64],
) -> Result<Vec<AliasPoint>> {
    cfg.validate()?;
    let np = cfg.padding;
    deltas
        .par_iter()
        .enumerate()
        .map(|(i, &delta)| {
            let tone = CalibrationTone { n_drive, delta, phase: 0.0 };
            let point_cfg = ProtocolConfig {
                seed: cfg.seed.wrapping_add(i as u64),
                ..*cfg
            };
            let est = simulate_spectrum(&point_cfg, &tone, qubit)?;
            let m = est.s.len();
            let predicted = predicted_peaks(delta, cfg);
            let predicted_bins = [est.axis.nearest_bin(predicted[0]), est.axis.nearest_bin(predicted[1])];
            let simulated_bins = two_peaks(&est, 2 * np);
            let separable = circular(predicted_bins[0], predicted_bins[1], m) > 4 * np;
            let matched = separable.then(|| {
                predicted_bins
                    .iter()
                    .all(|&p| simulated_bins.iter().any(|&s| circular(p, s, m) <= 1))
            });
            Ok(AliasPoint {
                delta,
                predicted,
                predicted_bins,
                simulated_bins,
                matched,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_loci() {
        let cfg = ProtocolConfig::default();
        let [a, b] = predicted_peaks(0.0, &cfg);
        assert_eq!(a, 0.0);
        assert!((b.abs() - cfg.nyquist()).abs() < 1e-9);
    }

    #[test]
    fn half_band_is_unambiguous() {
        let cfg = ProtocolConfig::default();
        let ny = cfg.nyquist();
        for x in [-0.45, -0.2, 0.1, 0.49] {
            let [a, b] = predicted_peaks(x * ny, &cfg);
            assert!((a - x * ny).abs() < 1e-9);
            assert!(b.abs() > 0.5 * ny);
        }
    }
}
