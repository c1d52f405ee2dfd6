//! Explicit Runge–Kutta integration with the Dormand–Prince 5(4) pair.
//!
//! States are anything implementing [`OdeState`]; real vectors, complex
//! vectors (Schrödinger) and complex matrices (density matrices) are
//! provided. Output is produced exactly at the requested times by clamping
//! the step, so no dense-output interpolation is involved.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait OdeState: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    /// Number of scalar (real) components, used for RMS error norms.
    fn len_real(&self) -> usize;
    /// Sum over components of `(err_i / (atol + rtol * max(|y0_i|, |y1_i|)))²`.
    fn weighted_sq_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

impl OdeState for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
    fn len_real(&self) -> usize {
        self.len()
    }
    fn weighted_sq_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        err.iter()
            .zip(y0.iter().zip(y1))
            .map(|(e, (a, b))| {
                let sc = atol + rtol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum()
    }
}

fn complex_sq_error<'a>(
    err: impl Iterator<Item = &'a Complex64>,
    y0: impl Iterator<Item = &'a Complex64>,
    y1: impl Iterator<Item = &'a Complex64>,
    atol: f64,
    rtol: f64,
) -> f64 {
    err.zip(y0.zip(y1))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum()
}

impl OdeState for DVector<Complex64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.zip_apply(x, |s, v| *s += v * a);
    }
    fn len_real(&self) -> usize {
        2 * self.len()
    }
    fn weighted_sq_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        2.0 * complex_sq_error(err.iter(), y0.iter(), y1.iter(), atol, rtol)
    }
}

impl OdeState for DMatrix<Complex64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.zip_apply(x, |s, v| *s += v * a);
    }
    fn len_real(&self) -> usize {
        2 * self.len()
    }
    fn weighted_sq_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        2.0 * complex_sq_error(err.iter(), y0.iter(), y1.iter(), atol, rtol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the right-hand side when `None`.
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            initial_step: None,
            max_step: None,
            max_steps: 20_000_000,
        }
    }
}

impl AdaptiveOptions {
    pub fn with_tolerance(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepping {
    Adaptive(AdaptiveOptions),
    /// Fixed step size (clamped so that every output time is hit exactly).
    Fixed { step: f64 },
}

impl Default for Stepping {
    fn default() -> Self {
        Stepping::Adaptive(AdaptiveOptions::default())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

pub struct Solution<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub stats: Stats,
}

// Dormand–Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stages<S> {
    k: [S; 7],
    tmp: S,
}

/// Integrate `dy/dt = rhs(t, y)` from `(t0, y0)` and return the state at each
/// of `t_out` (which must be non-decreasing and ≥ `t0`).
///
/// `rhs(t, y, dy)` must overwrite `dy` completely.
pub fn integrate<S, F>(
    mut rhs: F,
    t0: f64,
    y0: S,
    t_out: &[f64],
    stepping: Stepping,
) -> Result<Solution<S>>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S),
{
    if t_out.iter().any(|t| !t.is_finite()) || t_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Input("output times must be finite and non-decreasing".into()));
    }
    if t_out.first().is_some_and(|&t| t < t0) {
        return Err(Error::Input("output times precede the initial time".into()));
    }

    let mut stages = Stages {
        k: std::array::from_fn(|_| y0.clone()),
        tmp: y0.clone(),
    };
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0;
    let mut states = Vec::with_capacity(t_out.len());

    rhs(t, &y, &mut stages.k[0]);
    stats.rhs_evaluations += 1;

    let span = t_out.last().copied().unwrap_or(t0) - t0;
    let (mut h, opts) = match stepping {
        Stepping::Adaptive(o) => {
            let h0 = o
                .initial_step
                .unwrap_or_else(|| initial_step(&y, &stages.k[0], o, span));
            (h0, Some(o))
        }
        Stepping::Fixed { step } => {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::Input(format!("fixed step must be > 0, got {step}")));
            }
            (step, None)
        }
    };

    for &target in t_out {
        while t < target {
            let remaining = target - t;
            let mut step = h.min(remaining);
            if let Some(o) = opts {
                if let Some(hmax) = o.max_step {
                    step = step.min(hmax);
                }
            }
            // Avoid leaving a sliver smaller than round-off before the target.
            let last = remaining - step <= 1e-12 * target.abs().max(remaining);
            if last {
                step = remaining;
            }

            dopri_stages(&mut rhs, t, &y, step, &mut stages);
            stats.rhs_evaluations += 6;

            match opts {
                None => {
                    std::mem::swap(&mut y, &mut stages.tmp);
                    t = if last { target } else { t + step };
                    stages.k.swap(0, 6);
                    stats.accepted += 1;
                }
                Some(o) => {
                    let err = error_estimate(&y, &stages, step, o);
                    if err <= 1.0 {
                        std::mem::swap(&mut y, &mut stages.tmp);
                        t = if last { target } else { t + step };
                        stages.k.swap(0, 6);
                        stats.accepted += 1;
                        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        // Keep the controller's step when the last one was clamped.
                        h = if last { h.max(step * fac) } else { step * fac };
                    } else {
                        stats.rejected += 1;
                        h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                    }
                    let floor = 1e-14 * t.abs().max(span.abs()).max(f64::MIN_POSITIVE);
                    if h < floor || stats.accepted + stats.rejected > o.max_steps {
                        return Err(Error::Stiffness {
                            t,
                            step: h,
                            error_norm: err,
                            steps: stats.accepted + stats.rejected,
                        });
                    }
                }
            }
        }
        states.push(y.clone());
    }

    Ok(Solution {
        times: t_out.to_vec(),
        states,
        stats,
    })
}

fn initial_step<S: OdeState>(y: &S, f0: &S, o: AdaptiveOptions, span: f64) -> f64 {
    let n = y.len_real().max(1) as f64;
    let zero = {
        let mut z = y.clone();
        z.axpy(-1.0, y);
        z
    };
    let d0 = (S::weighted_sq_error(y, &zero, &zero, o.atol, o.rtol) / n).sqrt();
    let d1 = (S::weighted_sq_error(f0, y, y, o.atol, o.rtol) / n).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let cap = if span > 0.0 { span } else { 1.0 };
    h.min(cap).max(1e-12 * cap)
}

fn dopri_stages<S, F>(rhs: &mut F, t: f64, y: &S, h: f64, st: &mut Stages<S>)
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S),
{
    fn stage<S: OdeState>(y: &S, h: f64, st: &mut Stages<S>, coeffs: &[(usize, f64)]) {
        st.tmp.clone_from(y);
        for &(j, a) in coeffs {
            st.tmp.axpy(h * a, &st.k[j]);
        }
    }
    stage(y, h, st, &[(0, A21)]);
    rhs(t + C2 * h, &st.tmp, &mut st.k[1]);
    stage(y, h, st, &[(0, A31), (1, A32)]);
    rhs(t + C3 * h, &st.tmp, &mut st.k[2]);
    stage(y, h, st, &[(0, A41), (1, A42), (2, A43)]);
    rhs(t + C4 * h, &st.tmp, &mut st.k[3]);
    stage(y, h, st, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
    rhs(t + C5 * h, &st.tmp, &mut st.k[4]);
    stage(y, h, st, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
    rhs(t + h, &st.tmp, &mut st.k[5]);
    // Fifth-order solution, left in `tmp`; k[6] is its derivative (FSAL).
    stage(y, h, st, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
    rhs(t + h, &st.tmp, &mut st.k[6]);
}

fn error_estimate<S: OdeState>(y: &S, st: &Stages<S>, h: f64, o: AdaptiveOptions) -> f64 {
    let mut err = st.k[0].clone();
    err.axpy(-1.0, &st.k[0]);
    for (j, e) in [(0, E1), (2, E3), (3, E4), (4, E5), (5, E6), (6, E7)] {
        err.axpy(h * e, &st.k[j]);
    }
    let n = y.len_real().max(1) as f64;
    (S::weighted_sq_error(&err, y, &st.tmp, o.atol, o.rtol) / n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let sol = integrate(
            |_t, y: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = -2.0 * y[0],
            0.0,
            vec![1.0],
            &[0.5, 1.0, 3.0],
            Stepping::Adaptive(AdaptiveOptions::with_tolerance(1e-10, 1e-12)),
        )
        .unwrap();
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - (-2.0 * t).exp()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_energy_is_conserved() {
        let sol = integrate(
            |_t, y: &Vec<f64>, dy: &mut Vec<f64>| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            vec![1.0, 0.0],
            &[10.0 * std::f64::consts::PI],
            Stepping::Adaptive(AdaptiveOptions::with_tolerance(1e-11, 1e-13)),
        )
        .unwrap();
        let y = &sol.states[0];
        assert!((y[0] - 1.0).abs() < 1e-8);
        assert!(y[1].abs() < 1e-8);
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let run = |h: f64| {
            integrate(
                |_t, y: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = y[0],
                0.0,
                vec![1.0],
                &[1.0],
                Stepping::Fixed { step: h },
            )
            .unwrap()
            .states[0][0]
        };
        let e1 = (run(0.1) - 1f64.exp()).abs();
        let e2 = (run(0.05) - 1f64.exp()).abs();
        let order = (e1 / e2).log2();
        assert!(order > 4.5 && order < 5.8, "observed order {order}");
    }

    #[test]
    fn output_at_initial_time_returns_initial_state() {
        let sol = integrate(
            |_t, _y: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = 1.0,
            0.0,
            vec![3.0],
            &[0.0, 0.0, 1.0],
            Stepping::default(),
        )
        .unwrap();
        assert_eq!(sol.states[0][0], 3.0);
        assert!((sol.states[2][0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn decreasing_output_times_rejected() {
        let r = integrate(
            |_t, _y: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = 0.0,
            0.0,
            vec![0.0],
            &[1.0, 0.5],
            Stepping::default(),
        );
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn step_budget_exhaustion_reports_stiffness() {
        let opts = AdaptiveOptions {
            max_steps: 50,
            ..AdaptiveOptions::with_tolerance(1e-12, 1e-14)
        };
        let r = integrate(
            |_t, y: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = -1e6 * (y[0] - 1.0),
            0.0,
            vec![0.0],
            &[10.0],
            Stepping::Adaptive(opts),
        );
        assert!(matches!(r, Err(Error::Stiffness { .. })));
    }
}
