//! Levenberg–Marquardt least squares with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative cost reduction falls below this.
    pub ftol: f64,
    /// Stop when the relative parameter step falls below this.
    pub xtol: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            ftol: 1e-12,
            xtol: 1e-10,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub params: Vec<f64>,
    /// Half the sum of squared residuals at the solution.
    pub cost: f64,
    pub iterations: usize,
    /// `(JᵀJ)⁻¹` at the solution, unscaled. Multiply by the reduced χ² for
    /// the usual covariance estimate when residuals are not pre-weighted.
    pub jtj_inverse: Option<DMatrix<f64>>,
    pub residuals: Vec<f64>,
}

impl LmResult {
    pub fn reduced_chi_square(&self) -> f64 {
        let dof = self.residuals.len().saturating_sub(self.params.len()).max(1);
        2.0 * self.cost / dof as f64
    }

    /// Standard errors from `(JᵀJ)⁻¹` scaled by `scale` (1 for weighted fits,
    /// the reduced χ² for unweighted ones).
    pub fn standard_errors(&self, scale: f64) -> Option<Vec<f64>> {
        let c = self.jtj_inverse.as_ref()?;
        Some((0..c.nrows()).map(|i| (c[(i, i)] * scale).max(0.0).sqrt()).collect())
    }
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

pub fn jacobian<F>(f: &mut F, p: &[f64], r0_len: usize) -> DMatrix<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = p.len();
    let mut j = DMatrix::zeros(r0_len, n);
    let mut q = p.to_vec();
    for k in 0..n {
        let h = f64::EPSILON.cbrt() * p[k].abs().max(1e-3);
        q[k] = p[k] + h;
        let rp = f(&q);
        q[k] = p[k] - h;
        let rm = f(&q);
        q[k] = p[k];
        for i in 0..r0_len {
            j[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    j
}

/// Minimise `½‖r(p)‖²` starting from `p0`.
///
/// Residuals that become non-finite are treated as an infinitely bad step.
pub fn levenberg_marquardt<F>(mut residual: F, p0: &[f64], opts: LmOptions) -> Result<LmResult>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut r = residual(&p);
    let m = r.len();
    if m < n {
        return Err(Error::Input(format!("{m} residuals cannot determine {n} parameters")));
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::Fit {
            iterations: 0,
            cost: f64::NAN,
        });
    }
    let mut cost = cost_of(&r);
    let mut lambda = opts.initial_lambda;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let j = jacobian(&mut residual, &p, m);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);

        let mut improved = false;
        let mut converged = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = residual(&trial);
            let ct = if rt.iter().all(|x| x.is_finite()) { cost_of(&rt) } else { f64::INFINITY };
            if ct < cost {
                let rel_cost = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                let pnorm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                let rel_step = step.norm() / (pnorm + opts.xtol);
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                converged = rel_cost < opts.ftol || rel_step < opts.xtol;
                break;
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !improved || converged || cost == 0.0 {
            break;
        }
    }

    if !cost.is_finite() {
        return Err(Error::Fit { iterations, cost });
    }
    let j = jacobian(&mut residual, &p, m);
    let jtj_inverse = (j.transpose() * &j).try_inverse();
    Ok(LmResult {
        params: p,
        cost,
        iterations,
        jtj_inverse,
        residuals: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_parameters() {
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.5 * (-1.3 * t).exp() + 0.2).collect();
        let res = levenberg_marquardt(
            |p| ts.iter().zip(&ys).map(|(t, y)| p[0] * (-p[1] * t).exp() + p[2] - y).collect(),
            &[1.0, 0.5, 0.0],
            LmOptions::default(),
        )
        .unwrap();
        assert!((res.params[0] - 2.5).abs() < 1e-8);
        assert!((res.params[1] - 1.3).abs() < 1e-8);
        assert!((res.params[2] - 0.2).abs() < 1e-8);
        assert!(res.cost < 1e-18);
    }

    #[test]
    fn rosenbrock_minimum() {
        let res = levenberg_marquardt(
            |p| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]],
            &[-1.2, 1.0],
            LmOptions::default(),
        )
        .unwrap();
        assert!((res.params[0] - 1.0).abs() < 1e-7);
        assert!((res.params[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn linear_fit_covariance_matches_normal_equations() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.1, 4.9, 7.2];
        let res = levenberg_marquardt(
            |p| xs.iter().zip(&ys).map(|(x, y)| p[0] + p[1] * x - y).collect(),
            &[0.0, 0.0],
            LmOptions::default(),
        )
        .unwrap();
        let c = res.jtj_inverse.unwrap();
        // For design [1, x]: (XᵀX)⁻¹ = [[14, -6], [-6, 4]] / 20
        assert!((c[(0, 0)] - 0.7).abs() < 1e-6);
        assert!((c[(1, 1)] - 0.2).abs() < 1e-6);
        assert!((c[(0, 1)] + 0.3).abs() < 1e-6);
    }

    #[test]
    fn too_few_residuals_rejected() {
        let r = levenberg_marquardt(|p| vec![p[0] + p[1]], &[0.0, 0.0], LmOptions::default());
        assert!(matches!(r, Err(Error::Input(_))));
    }
}
