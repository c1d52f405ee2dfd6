use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::protocol::{CalibrationTone, ProtocolConfig, SensorQubit};
use crate::error::{Error, Result};

/// Magic bytes opening a packed raw record.
pub const RAW_MAGIC: [u8; 2] = *b"FB";

/// Binary outcomes of consecutive shots, grouped in windows of `n_window`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub n_window: usize,
    pub bits: Vec<u8>,
}

impl MeasurementRecord {
    pub fn new(n_window: usize, bits: Vec<u8>) -> Result<Self> {
        if n_window == 0 || !bits.len().is_multiple_of(n_window) {
            return Err(Error::Input(format!(
                "record of {} shots is not a whole number of {n_window}-shot windows",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Input("record bits must be 0 or 1".into()));
        }
        Ok(Self { n_window, bits })
    }

    pub fn n_windows(&self) -> usize {
        self.bits.len() / self.n_window
    }

    pub fn window(&self, w: usize) -> &[u8] {
        &self.bits[w * self.n_window..(w + 1) * self.n_window]
    }

    /// Header (magic, N as u16 LE, window count as u32 LE) followed by the
    /// bits packed least-significant-bit first.
    pub fn write_packed<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = u16::try_from(self.n_window)
            .map_err(|_| std::io::Error::new(std::io::ErrorKind::InvalidInput, "window length exceeds u16"))?;
        let w = u32::try_from(self.n_windows())
            .map_err(|_| std::io::Error::new(std::io::ErrorKind::InvalidInput, "window count exceeds u32"))?;
        out.write_all(&RAW_MAGIC)?;
        out.write_all(&n.to_le_bytes())?;
        out.write_all(&w.to_le_bytes())?;
        let mut packed = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            packed[i / 8] |= b << (i % 8);
        }
        out.write_all(&packed)
    }

    pub fn read_packed<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; 8];
        input
            .read_exact(&mut header)
            .map_err(|e| Error::Input(format!("raw record header: {e}")))?;
        if header[..2] != RAW_MAGIC {
            return Err(Error::Input("raw record has wrong magic".into()));
        }
        let n = u16::from_le_bytes([header[2], header[3]]) as usize;
        let w = u32::from_le_bytes([header[4], header[5], header[6], header[7]]) as usize;
        let total = n * w;
        let mut packed = vec![0u8; total.div_ceil(8)];
        input
            .read_exact(&mut packed)
            .map_err(|e| Error::Input(format!("raw record body: {e}")))?;
        let bits = (0..total).map(|i| (packed[i / 8] >> (i % 8)) & 1).collect();
        Self::new(n, bits)
    }
}

/// i^k for integer k.
pub(crate) fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// ⟨m_k⟩ = 1/2 + Re[σ (−i)^k e^{iΔkτ}], with σ the scaled ⟨σ⟩₀.
pub(crate) fn shot_probability(sigma: Complex64, delta: f64, tau: f64, k: usize) -> f64 {
    let rot = i_pow(k).conj() * Complex64::from_polar(1.0, delta * k as f64 * tau);
    0.5 + (sigma * rot).re
}

pub(crate) fn window_rng(seed: u64, window: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(window as u64);
    rng
}

/// Draw one window of shots (global shot indices starting at `w·N`).
pub(crate) fn simulate_window(sigma: Complex64, delta: f64, cfg: &ProtocolConfig, w: usize, out: &mut [u8]) -> Result<()> {
    let mut rng = window_rng(cfg.seed, w);
    let tau = cfg.tau();
    let base = w * cfg.n_window;
    for (j, bit) in out.iter_mut().enumerate() {
        let mut p = shot_probability(sigma, delta, tau, base + j);
        if !(-1e-12..=1.0 + 1e-12).contains(&p) {
            return Err(Error::Numerical(format!("shot probability {p} outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&p) {
            log::warn!("clipping shot probability {p}");
            p = p.clamp(0.0, 1.0);
        }
        *bit = u8::from(rng.random::<f64>() < p);
    }
    Ok(())
}

/// The scaled transverse signal s·⟨σ⟩₀ driving the shot statistics.
pub(crate) fn scaled_sigma0(cfg: &ProtocolConfig, tone: &CalibrationTone, qubit: &SensorQubit) -> Complex64 {
    qubit.sigma0(tone, cfg.tau_i) * cfg.readout_scale
}

/// Monte Carlo measurement record; windows are drawn in parallel from
/// independent streams, so the result does not depend on the thread count.
pub fn simulate_record(cfg: &ProtocolConfig, tone: &CalibrationTone, qubit: &SensorQubit) -> Result<MeasurementRecord> {
    cfg.validate()?;
    tone.validate()?;
    qubit.validate()?;
    let sigma = scaled_sigma0(cfg, tone, qubit);
    let mut bits = vec![0u8; cfg.n_window * cfg.n_windows];
    bits.par_chunks_mut(cfg.n_window)
        .enumerate()
        .try_for_each(|(w, chunk)| simulate_window(sigma, tone.delta, cfg, w, chunk))?;
    MeasurementRecord::new(cfg.n_window, bits)
}

/// σ_k = i^k (m_k − 1/2), with k the global shot index starting at `k0`.
pub fn telegraph_transform(bits: &[u8], k0: usize) -> Vec<Complex64> {
    bits.iter()
        .enumerate()
        .map(|(j, &m)| i_pow(k0 + j) * (m as f64 - 0.5))
        .collect()
}
