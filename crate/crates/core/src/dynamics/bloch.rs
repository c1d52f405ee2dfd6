use serde::Serialize;

use crate::error::{require_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochState {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState { sx: 0.0, sy: 0.0, sz: -1.0 };

    pub fn norm(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy + self.sz * self.sz).sqrt()
    }

    /// |sx + i·sy|.
    pub fn transverse(&self) -> f64 {
        self.sx.hypot(self.sy)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.sx, self.sy, self.sz]
    }
}

/// sin(x)/x.
fn sinc_u(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// sin(πx)/(πx).
pub(crate) fn sinc(x: f64) -> f64 {
    sinc_u(std::f64::consts::PI * x)
}

/// Driven, damped pseudo-spin from s(0) = (0, 0, −1): rotation at Ω_r about
/// x in a frame detuned by Δ, isotropic contraction at 2Γ.
pub fn bloch_closed_form(omega_r: f64, delta: f64, gamma: f64, t: f64) -> BlochState {
    let w = omega_r.hypot(delta);
    let damp = (-2.0 * gamma * t).exp();
    // (1 − cos Wt)/W² and sin(Wt)/W, written to stay finite as W → 0.
    let one_minus_cos = 0.5 * t * t * sinc_u(0.5 * w * t).powi(2);
    let sin_over = t * sinc_u(w * t);
    BlochState {
        sx: -damp * delta * omega_r * one_minus_cos,
        sy: damp * omega_r * sin_over,
        sz: -damp * (1.0 - omega_r * omega_r * one_minus_cos),
    }
}

/// Right-hand side of the Bloch equations solved by [`bloch_closed_form`].
pub fn bloch_rhs(omega_r: f64, delta: f64, gamma: f64, s: [f64; 3]) -> [f64; 3] {
    let [sx, sy, sz] = s;
    [
        -delta * sy - 2.0 * gamma * sx,
        delta * sx - omega_r * sz - 2.0 * gamma * sy,
        omega_r * sy - 2.0 * gamma * sz,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorResponse {
    /// Exact f(Δ) = |s_⊥(τ_I)|/(Ω_r τ_I) at Γ = 0.
    pub exact: f64,
    /// sinc(Δ/Ω_full) with Ω_full = 2π/τ_I (signed; compare with |·|).
    pub approx: f64,
}

pub fn detector_response(delta: f64, omega_r: f64, tau_i: f64) -> Result<DetectorResponse> {
    require_positive("tau_I", tau_i)?;
    let w2 = omega_r * omega_r + delta * delta;
    let x = w2.sqrt() * tau_i;
    let exact = if w2 == 0.0 {
        1.0
    } else {
        ((delta * delta * sinc_u(0.5 * x).powi(2) + omega_r * omega_r * sinc_u(x).powi(2)) / w2).sqrt()
    };
    let omega_full = std::f64::consts::TAU / tau_i;
    Ok(DetectorResponse {
        exact,
        approx: sinc(delta / omega_full),
    })
}
