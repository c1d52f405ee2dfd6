use serde::{Deserialize, Serialize};

use super::lindblad::{lindblad_evolve, DensityMatrix, Hamiltonian, LindbladSystem};
use super::qubit::{QubitDissipation, QubitModel};
use crate::circuit::diagonalize_and_label;
use crate::error::{Error, Result};
use crate::linalg::{to_complex, CMatrix};
use crate::ode::Stepping;

/// Piecewise-linear schedule through `(time, value)` breakpoints; constant
/// outside the first and last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Input("schedule needs at least one breakpoint".into()));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Input("schedule breakpoints must be finite".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Input("schedule times must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    pub fn value(&self, t: f64) -> f64 {
        let p = &self.points;
        if t <= p[0].0 {
            return p[0].1;
        }
        if t >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let i = p.partition_point(|(ti, _)| *ti <= t) - 1;
        let (t0, v0) = p[i];
        let (t1, v1) = p[i + 1];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn end_time(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }
}

/// Populations of the instantaneous eigenstates along a flux ramp.
#[derive(Debug, Clone, Serialize)]
pub struct RampReport {
    pub times: Vec<f64>,
    pub phi_ext: Vec<f64>,
    /// `populations[t][k]`: weight of the k-th instantaneous eigenstate.
    pub populations: Vec<Vec<f64>>,
    /// Weight remaining in the instantaneous eigenstate with the initial index.
    pub adiabatic_fidelity: Vec<f64>,
}

/// Evolve the projected model through a flux schedule, starting in the
/// instantaneous eigenstate `initial_level` at the schedule's start.
pub fn flux_ramp(
    model: &QubitModel,
    schedule: &PiecewiseLinear,
    dissipation: Option<QubitDissipation>,
    initial_level: usize,
    times: &[f64],
    stepping: Stepping,
) -> Result<RampReport> {
    let n = model.levels();
    if initial_level >= n {
        return Err(Error::Input(format!("initial level {initial_level} outside {n} levels")));
    }
    let t0 = schedule.points[0].0;
    let eig0 = diagonalize_and_label(&model.hamiltonian(schedule.value(t0)), n)?;
    let psi0 = to_complex(&eig0.states).column(initial_level).into_owned();

    let m = model.clone();
    let sched = schedule.clone();
    let h = Hamiltonian::Function(Box::new(move |t| to_complex(&m.hamiltonian(sched.value(t)))));
    let losses = dissipation.map(|d| d.loss_ops(n)).unwrap_or_default();
    let system = LindbladSystem::new(h, losses)?;
    let tr = lindblad_evolve(&system, &DensityMatrix::pure(&psi0), t0, times, stepping)?;

    let mut populations = Vec::with_capacity(times.len());
    let mut fidelity = Vec::with_capacity(times.len());
    let mut phis = Vec::with_capacity(times.len());
    for (t, rho) in times.iter().zip(&tr.states) {
        let phi = schedule.value(*t);
        let eig = diagonalize_and_label(&model.hamiltonian(phi), n)?;
        let v: CMatrix = to_complex(&eig.states);
        let pops: Vec<f64> = (0..n)
            .map(|k| {
                let c = v.column(k);
                (c.adjoint() * &rho.0 * c)[(0, 0)].re
            })
            .collect();
        fidelity.push(pops[initial_level]);
        populations.push(pops);
        phis.push(phi);
    }
    Ok(RampReport {
        times: times.to_vec(),
        phi_ext: phis,
        populations,
        adiabatic_fidelity: fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation() {
        let s = PiecewiseLinear::new(vec![(0.0, 1.0), (2.0, 3.0), (3.0, 3.0)]).unwrap();
        assert_eq!(s.value(-1.0), 1.0);
        assert!((s.value(1.0) - 2.0).abs() < 1e-15);
        assert_eq!(s.value(2.5), 3.0);
        assert_eq!(s.value(10.0), 3.0);
        assert!(PiecewiseLinear::new(vec![(1.0, 0.0), (1.0, 1.0)]).is_err());
    }
}
