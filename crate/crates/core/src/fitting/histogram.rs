use serde::{Deserialize, Serialize};

use super::readout::{normal_cdf, ReadoutModel};
use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};

pub const HISTOGRAM_BINS: usize = 128;
pub const HISTOGRAM_HALF_WIDTH: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_values(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(hi > lo) || bins == 0 {
            return Err(Error::Input(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        let mut counts = vec![0u64; bins];
        let width = (hi - lo) / bins as f64;
        for &v in values {
            if v >= lo && v < hi {
                let k = (((v - lo) / width) as usize).min(bins - 1);
                counts[k] += 1;
            }
        }
        Ok(Self { lo, hi, counts })
    }

    /// Standard binning for a readout model: the range extends 5σ beyond the
    /// outermost blob centers along I.
    pub fn for_model(values: &[f64], model: &ReadoutModel) -> Result<Self> {
        let xs = [model.center_ge[0], model.center_f[0], model.center_h[0]];
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min) - HISTOGRAM_HALF_WIDTH * model.sigma;
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + HISTOGRAM_HALF_WIDTH * model.sigma;
        Self::from_values(values, lo, hi, HISTOGRAM_BINS)
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.width()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Local maxima of a 5-bin moving average, tallest first.
    pub fn peaks(&self) -> Vec<usize> {
        let n = self.bins();
        let smooth: Vec<f64> = (0..n)
            .map(|k| {
                let a = k.saturating_sub(2);
                let b = (k + 3).min(n);
                self.counts[a..b].iter().sum::<u64>() as f64 / (b - a) as f64
            })
            .collect();
        let max = smooth.iter().cloned().fold(0.0, f64::max);
        let mut peaks: Vec<usize> = (0..n)
            .filter(|&k| {
                let left = k == 0 || smooth[k] > smooth[k - 1];
                let right = k + 1 == n || smooth[k] >= smooth[k + 1];
                left && right && smooth[k] > 0.01 * max
            })
            .collect();
        peaks.sort_by(|&a, &b| smooth[b].total_cmp(&smooth[a]));
        peaks
    }
}

/// Starting positions for the three peaks and their common width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakGuess {
    pub ge: f64,
    pub f: f64,
    pub h: f64,
    pub sigma: f64,
}

impl PeakGuess {
    pub fn from_model(model: &ReadoutModel) -> Self {
        Self {
            ge: model.center_ge[0],
            f: model.center_f[0],
            h: model.center_h[0],
            sigma: model.sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalHistogramFit {
    pub p_ge: f64,
    pub p_fh: f64,
    pub p_fh_std: f64,
    pub centers: [f64; 3],
    pub sigma: f64,
    /// Set when the f/h peaks are not significantly populated.
    pub degenerate: bool,
    pub reduced_chi_square: f64,
}

/// Gaussian width implied by the half-maximum crossing on the side of the
/// peak with fewer neighbours.
fn half_width(hist: &Histogram, peak: usize) -> f64 {
    let half = hist.counts[peak] as f64 / 2.0;
    let right = (peak..hist.bins()).find(|&k| (hist.counts[k] as f64) < half);
    let left = (0..=peak).rev().find(|&k| (hist.counts[k] as f64) < half);
    let bins = match (left, right) {
        (Some(l), Some(r)) => (peak - l).min(r - peak),
        (Some(l), None) => peak - l,
        (None, Some(r)) => r - peak,
        (None, None) => hist.bins() / 4,
    };
    (bins.max(1) as f64 * hist.width()) / (2.0_f64.ln() * 2.0).sqrt()
}

fn bin_mass(lo: f64, hi: f64, mu: f64, s: f64) -> f64 {
    normal_cdf((hi - mu) / s) - normal_cdf((lo - mu) / s)
}

/// Triple-Gaussian fit with the f and h peaks sharing one area. Peaks are
/// located in the data unless `guess` is provided.
pub fn fit_thermal_histogram(hist: &Histogram, guess: Option<PeakGuess>) -> Result<ThermalHistogramFit> {
    let total = hist.total() as f64;
    if total == 0.0 {
        return Err(Error::Input("empty histogram".into()));
    }
    let guess = match guess {
        Some(g) => g,
        None => {
            let peaks = hist.peaks();
            if peaks.len() < 3 {
                return Err(Error::Fit {
                    iterations: 0,
                    cost: f64::NAN,
                });
            }
            PeakGuess {
                ge: hist.center(peaks[0]),
                f: hist.center(peaks[1]),
                h: hist.center(peaks[2]),
                sigma: half_width(hist, peaks[0]),
            }
        }
    };

    let w = hist.width();
    let edges = |k: usize| (hist.lo + k as f64 * w, hist.lo + (k + 1) as f64 * w);
    let model = |p: &[f64], k: usize| {
        let (lo, hi) = edges(k);
        let s = p[5].exp();
        p[0] * bin_mass(lo, hi, p[2], s) + p[1] * (bin_mass(lo, hi, p[3], s) + bin_mass(lo, hi, p[4], s))
    };
    let weights: Vec<f64> = hist.counts.iter().map(|&c| 1.0 / (c.max(1) as f64).sqrt()).collect();
    let p0 = [0.9 * total, 0.05 * total, guess.ge, guess.f, guess.h, guess.sigma.ln()];
    let res = levenberg_marquardt(
        |p| {
            (0..hist.bins())
                .map(|k| (model(p, k) - hist.counts[k] as f64) * weights[k])
                .collect()
        },
        &p0,
        LmOptions::default(),
    )?;
    let p = &res.params;
    let norm = p[0] + 2.0 * p[1];
    if !(norm > 0.0) || !p[0].is_finite() {
        return Err(Error::Fit {
            iterations: res.iterations,
            cost: res.cost,
        });
    }
    let p_fh = 2.0 * p[1] / norm;
    let scale = res.reduced_chi_square().max(1.0);
    let p_fh_std = res
        .standard_errors(scale)
        .map(|se| {
            // d p_fh / d a_ge and d a_fh
            let d0 = -2.0 * p[1] / (norm * norm);
            let d1 = 2.0 * p[0] / (norm * norm);
            let cov = res.jtj_inverse.as_ref().map(|c| c[(0, 1)] * scale).unwrap_or(0.0);
            (d0 * d0 * se[0] * se[0] + d1 * d1 * se[1] * se[1] + 2.0 * d0 * d1 * cov).max(0.0).sqrt()
        })
        .unwrap_or(f64::NAN);
    let degenerate = !(p_fh > 2.0 * p_fh_std);
    if degenerate {
        log::warn!("f/h peaks not resolved: p_fh = {p_fh:.3e} ± {p_fh_std:.1e}");
    }
    Ok(ThermalHistogramFit {
        p_ge: p[0] / norm,
        p_fh,
        p_fh_std,
        centers: [p[2], p[3], p[4]],
        sigma: p[5].exp(),
        degenerate,
        reduced_chi_square: res.reduced_chi_square(),
    })
}
