use num_complex::Complex64;

use super::periodogram::Axis;
use super::protocol::{ProtocolConfig, SensorQubit};
use super::record::scaled_sigma0;
use super::CalibrationTone;
use crate::dynamics::sinc;

/// ∫_{−1}^{1} sinc²(x) dx for sinc(x) = sin(πx)/(πx): the share of a sinc²
/// line's power inside its main lobe.
pub const MAIN_LOBE_FRACTION: f64 = 0.902_823_333_580_280_4;

/// Σ_{k<N} e^{ikx}.
fn dirichlet(n: usize, x: f64) -> Complex64 {
    let nf = n as f64;
    let half = 0.5 * x;
    let s = half.sin();
    if s.abs() < 1e-9 {
        // x ≈ 2πm: every term is ≈ 1 up to the small offset.
        let m = (x / std::f64::consts::TAU).round();
        let d = x - m * std::f64::consts::TAU;
        return Complex64::from_polar(nf, 0.5 * (nf - 1.0) * d);
    }
    Complex64::from_polar((nf * half).sin() / s, 0.5 * (nf - 1.0) * x)
}

/// The two Dirichlet sums making up ⟨Z_n⟩ for a window starting at shot 0:
/// ⟨Z_n⟩ = ½[σ·T₁ + σ*·T₂].
fn kernels(delta: f64, axis: &Axis) -> (Vec<Complex64>, Vec<Complex64>) {
    let tau = axis.tau;
    let n = axis.n_window;
    (0..axis.len())
        .map(|b| {
            let dn = axis.bin_frequency(b);
            (
                dirichlet(n, (delta - dn) * tau),
                dirichlet(n, std::f64::consts::PI - (delta + dn) * tau),
            )
        })
        .unzip()
}

/// ⟨Z_n⟩ for the window whose first shot has global index `k0`; `sigma` is
/// the scaled ⟨σ⟩₀.
pub fn expected_transform(sigma: Complex64, delta: f64, axis: &Axis, k0: usize) -> Vec<Complex64> {
    let (t1, t2) = kernels(delta, axis);
    let th = delta * k0 as f64 * axis.tau;
    let sign = if k0.is_multiple_of(2) { 1.0 } else { -1.0 };
    let a = sigma * Complex64::from_polar(0.5, th);
    let b = sigma.conj() * Complex64::from_polar(0.5 * sign, -th);
    t1.iter().zip(&t2).map(|(x, y)| a * x + b * y).collect()
}

/// Bartlett mean of |⟨Z_n⟩|² over windows 0..`n_windows`. The two terms of
/// ⟨Z_n⟩ carry window-dependent relative phases, so the cross term averages
/// down as windows accumulate.
pub fn lineshape_exact(sigma: Complex64, delta: f64, axis: &Axis, n_windows: usize) -> Vec<f64> {
    let (t1, t2) = kernels(delta, axis);
    let n = axis.n_window;
    let c: Complex64 = (0..n_windows.max(1))
        .map(|w| {
            let k0 = w * n;
            let sign = if k0.is_multiple_of(2) { 1.0 } else { -1.0 };
            Complex64::from_polar(sign, 2.0 * delta * k0 as f64 * axis.tau)
        })
        .sum::<Complex64>()
        / n_windows.max(1) as f64;
    let s2 = sigma.norm_sqr();
    t1.iter()
        .zip(&t2)
        .map(|(x, y)| 0.25 * (s2 * (x.norm_sqr() + y.norm_sqr()) + 2.0 * (sigma * sigma * x * y.conj() * c).re))
        .collect()
}

/// ¼|σ|²(|T₁|² + |T₂|²), the many-window limit of [`lineshape_exact`].
pub fn lineshape_incoherent(sigma: f64, delta: f64, axis: &Axis) -> Vec<f64> {
    let (t1, t2) = kernels(delta, axis);
    t1.iter()
        .zip(&t2)
        .map(|(x, y)| 0.25 * sigma * sigma * (x.norm_sqr() + y.norm_sqr()))
        .collect()
}

fn wrap(x: f64, nyquist: f64) -> f64 {
    (x + nyquist).rem_euclid(2.0 * nyquist) - nyquist
}

/// (σN/2)²[sinc²((Δ_n − Δ)/Ω_RBW) + sinc²((Δ_n − Ω_Ny + Δ)/Ω_RBW)] with
/// aliased distances.
pub fn lineshape_sinc2(sigma: f64, delta: f64, axis: &Axis) -> Vec<f64> {
    let ny = std::f64::consts::PI / axis.tau;
    let rbw = std::f64::consts::TAU / (axis.n_window as f64 * axis.tau);
    let h = (0.5 * sigma * axis.n_window as f64).powi(2);
    (0..axis.len())
        .map(|b| {
            let dn = axis.bin_frequency(b);
            let a = sinc(wrap(dn - delta, ny) / rbw);
            let c = sinc(wrap(dn - (ny - delta), ny) / rbw);
            h * (a * a + c * c)
        })
        .collect()
}

/// s·⟨σ⟩₀, the complex signal amplitude entering the shot statistics.
pub fn signal_amplitude(cfg: &ProtocolConfig, tone: &CalibrationTone, qubit: &SensorQubit) -> Complex64 {
    scaled_sigma0(cfg, tone, qubit)
}

/// SNR = √N·|s·⟨σ⟩₀|, including the detector response and readout scale.
pub fn snr_predict(cfg: &ProtocolConfig, tone: &CalibrationTone, qubit: &SensorQubit) -> f64 {
    (cfg.n_window as f64).sqrt() * scaled_sigma0(cfg, tone, qubit).norm()
}

/// In-band form √N·s·e^{−τ_I/T₁}·Ω_r τ_I/2.
pub fn snr_in_band(cfg: &ProtocolConfig, n_drive: f64, qubit: &SensorQubit) -> f64 {
    let om = qubit.rabi_frequency(n_drive);
    let decay = (-cfg.tau_i / qubit.dissipation.t1()).exp();
    (cfg.n_window as f64).sqrt() * cfg.readout_scale * decay * om * cfg.tau_i / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::record::i_pow;

    fn expected_sample(sigma: Complex64, delta: f64, tau: f64, k: usize) -> Complex64 {
        let rot = i_pow(k).conj() * Complex64::from_polar(1.0, delta * k as f64 * tau);
        i_pow(k) * (sigma * rot).re
    }

    fn axis(n: usize, np: usize, tau: f64) -> Axis {
        Axis { tau, n_window: n, padding: np }
    }

    #[test]
    fn main_lobe_fraction_by_quadrature() {
        let steps = 200_000;
        let h = 2.0 / steps as f64;
        let f = |x: f64| sinc(x).powi(2);
        let mut acc = f(-1.0) + f(1.0);
        for i in 1..steps {
            let x = -1.0 + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        assert!((acc * h / 3.0 - MAIN_LOBE_FRACTION).abs() < 1e-12);
    }

    #[test]
    fn closed_form_transform_matches_direct_sum() {
        let ax = axis(12, 3, 1.7);
        let sigma = Complex64::new(0.21, -0.07);
        let delta = 0.37;
        for k0 in [0usize, 12, 36] {
            let z = expected_transform(sigma, delta, &ax, k0);
            let m = ax.len();
            for b in 0..m {
                let direct: Complex64 = (0..12)
                    .map(|j| {
                        expected_sample(sigma, delta, ax.tau, k0 + j)
                            * Complex64::from_polar(1.0, -std::f64::consts::TAU * (j * b) as f64 / m as f64)
                    })
                    .sum();
                assert!((direct - z[b]).norm() < 1e-12, "bin {b}, k0 {k0}");
            }
        }
    }

    #[test]
    fn peak_height_and_first_zero() {
        let ax = axis(1000, 5, 33e-6);
        let rbw = std::f64::consts::TAU / (1000.0 * 33e-6);
        let delta = 40.0 * ax.bin_frequency(1);
        let s = lineshape_sinc2(0.1, delta, &ax);
        let peak = ax.nearest_bin(delta);
        assert!((s[peak] - (0.1 * 500.0f64).powi(2)).abs() < 1e-9);
        let zero = ax.nearest_bin(delta + rbw);
        assert!(s[zero] < 1e-9 * s[peak]);
        let exact = lineshape_incoherent(0.1, delta, &ax);
        assert!((exact[peak] / s[peak] - 1.0).abs() < 1e-3);
    }
}
