use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, I, ONE, ZERO};
use crate::ode::{integrate, Stats, Stepping};

/// Density matrix on a truncated Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub CMatrix);

impl DensityMatrix {
    pub fn pure(psi: &CVector) -> Self {
        Self(psi * psi.adjoint())
    }

    /// |k⟩⟨k| in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self(crate::linalg::ket_bra(dim, k, k))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        crate::linalg::trace(&self.0).re
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (&self.0 * op).trace()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.0[(k, k)].re
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        // Real symmetric embedding [[Re, −Im], [Im, Re]] has the same spectrum (doubled).
        let n = h.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = h[(i, j)];
                m[(i, j)] = z.re;
                m[(i + n, j + n)] = z.re;
                m[(i, j + n)] = -z.im;
                m[(i + n, j)] = z.im;
            }
        }
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks unit trace, Hermiticity and positivity.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::Numerical(format!("density matrix trace {tr}")));
        }
        let herm = crate::linalg::hermiticity_defect(&self.0);
        if herm > tol {
            return Err(Error::Numerical(format!("density matrix Hermiticity defect {herm:e}")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8_f64.max(tol) {
            return Err(Error::Numerical(format!("density matrix eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Partial trace over the second factor of `dim_a ⊗ dim_b`.
    pub fn trace_out_second(&self, dim_a: usize, dim_b: usize) -> CMatrix {
        let mut r = CMatrix::zeros(dim_a, dim_a);
        for i in 0..dim_a {
            for j in 0..dim_a {
                let mut acc = ZERO;
                for k in 0..dim_b {
                    acc += self.0[(i * dim_b + k, j * dim_b + k)];
                }
                r[(i, j)] = acc;
            }
        }
        r
    }
}

type Envelope = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Hamiltonian generator in rad/s.
pub enum Hamiltonian {
    Static(CMatrix),
    /// H(t) = H₀ + Σ fᵢ(t)·Hᵢ.
    Driven { h0: CMatrix, terms: Vec<(CMatrix, Envelope)> },
    /// Arbitrary H(t), rebuilt on every evaluation.
    Function(Box<dyn Fn(f64) -> CMatrix + Send + Sync>),
}

impl Hamiltonian {
    pub fn driven(h0: CMatrix) -> Self {
        Hamiltonian::Driven { h0, terms: Vec::new() }
    }

    pub fn with_term(self, op: CMatrix, envelope: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        match self {
            Hamiltonian::Static(h0) => Hamiltonian::Driven {
                h0,
                terms: vec![(op, Box::new(envelope))],
            },
            Hamiltonian::Driven { h0, mut terms } => {
                terms.push((op, Box::new(envelope)));
                Hamiltonian::Driven { h0, terms }
            }
            Hamiltonian::Function(f) => Hamiltonian::Function(Box::new(move |t| f(t) + &op * Complex64::new(envelope(t), 0.0))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Static(h) | Hamiltonian::Driven { h0: h, .. } => h.nrows(),
            Hamiltonian::Function(f) => f(0.0).nrows(),
        }
    }

    /// Writes H(t) into `out`.
    pub fn eval_into(&self, t: f64, out: &mut CMatrix) {
        match self {
            Hamiltonian::Static(h) => out.copy_from(h),
            Hamiltonian::Driven { h0, terms } => {
                out.copy_from(h0);
                for (op, f) in terms {
                    let c = f(t);
                    if c != 0.0 {
                        out.zip_apply(op, |o, v| *o += v * c);
                    }
                }
            }
            Hamiltonian::Function(f) => out.copy_from(&f(t)),
        }
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        self.eval_into(t, &mut m);
        m
    }
}

/// dρ/dt = −i[H, ρ] + Σ_L (LρL† − ½{L†L, ρ}).
pub struct LindbladSystem {
    pub hamiltonian: Hamiltonian,
    pub loss_ops: Vec<CMatrix>,
}

impl LindbladSystem {
    pub fn new(hamiltonian: Hamiltonian, loss_ops: Vec<CMatrix>) -> Result<Self> {
        let n = hamiltonian.dim();
        for (i, l) in loss_ops.iter().enumerate() {
            if l.shape() != (n, n) {
                return Err(Error::Input(format!(
                    "loss operator {i} is {:?}, Hamiltonian is {n}×{n}",
                    l.shape()
                )));
            }
        }
        Ok(Self { hamiltonian, loss_ops })
    }
}

pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub stats: Stats,
}

impl Trajectory {
    pub fn expectation(&self, op: &CMatrix) -> Vec<Complex64> {
        self.states.iter().map(|r| r.expectation(op)).collect()
    }

    pub fn populations(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|r| r.population(k)).collect()
    }
}

/// Integrate the master equation and return ρ at each of `times`.
pub fn lindblad_evolve(
    system: &LindbladSystem,
    rho0: &DensityMatrix,
    t0: f64,
    times: &[f64],
    stepping: Stepping,
) -> Result<Trajectory> {
    let n = system.hamiltonian.dim();
    if rho0.dim() != n {
        return Err(Error::Input(format!("initial state is {}-dimensional, system is {n}", rho0.dim())));
    }
    let half = Complex64::new(0.5, 0.0);
    let decay = system
        .loss_ops
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, l| acc + l.adjoint() * l)
        * half;
    let daggers: Vec<CMatrix> = system.loss_ops.iter().map(|l| l.adjoint()).collect();
    let mut h = CMatrix::zeros(n, n);
    let mut heff = CMatrix::zeros(n, n);
    let mut tmp = CMatrix::zeros(n, n);
    let mut lr = CMatrix::zeros(n, n);

    let rhs = |t: f64, rho: &CMatrix, d: &mut CMatrix| {
        system.hamiltonian.eval_into(t, &mut h);
        // K = −iH − ½ΣL†L;  dρ = Kρ + ρK† + ΣLρL†
        heff.zip_zip_apply(&h, &decay, |k, hv, dv| *k = -I * hv - dv);
        d.gemm(ONE, &heff, rho, ZERO);
        tmp.gemm(ONE, rho, &heff.adjoint(), ZERO);
        *d += &tmp;
        for (l, ld) in system.loss_ops.iter().zip(&daggers) {
            lr.gemm(ONE, l, rho, ZERO);
            d.gemm(ONE, &lr, ld, ONE);
        }
    };
    let sol = integrate(rhs, t0, rho0.0.clone(), times, stepping)?;
    Ok(Trajectory {
        times: sol.times,
        states: sol.states.into_iter().map(DensityMatrix).collect(),
        stats: sol.stats,
    })
}

/// Integrate i dψ/dt = H(t)ψ.
pub fn schrodinger_evolve(
    hamiltonian: &Hamiltonian,
    psi0: &CVector,
    t0: f64,
    times: &[f64],
    stepping: Stepping,
) -> Result<(Vec<CVector>, Stats)> {
    let n = hamiltonian.dim();
    if psi0.len() != n {
        return Err(Error::Input(format!("initial state is {}-dimensional, system is {n}", psi0.len())));
    }
    let mut h = CMatrix::zeros(n, n);
    let rhs = |t: f64, psi: &CVector, d: &mut CVector| {
        hamiltonian.eval_into(t, &mut h);
        d.gemv(-I, &h, psi, ZERO);
    };
    let sol = integrate(rhs, t0, psi0.clone(), times, stepping)?;
    Ok((sol.states, sol.stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{annihilation, kron, to_complex};
    use crate::ode::AdaptiveOptions;

    fn tight() -> Stepping {
        Stepping::Adaptive(AdaptiveOptions::with_tolerance(1e-10, 1e-12))
    }

    #[test]
    fn photon_decay() {
        let a = annihilation(4);
        let kappa: f64 = 2.0;
        let sys = LindbladSystem::new(
            Hamiltonian::Static(CMatrix::zeros(4, 4)),
            vec![a.clone() * Complex64::new(kappa.sqrt(), 0.0)],
        )
        .unwrap();
        let times = [0.1, 0.5, 1.0, 2.0];
        let tr = lindblad_evolve(&sys, &DensityMatrix::basis(4, 1), 0.0, &times, tight()).unwrap();
        let num = a.adjoint() * &a;
        for (t, r) in times.iter().zip(&tr.states) {
            assert!((r.expectation(&num).re - (-kappa * t).exp()).abs() < 1e-9);
            r.validate(1e-9).unwrap();
        }
    }

    #[test]
    fn unitary_limit_preserves_purity() {
        let h = to_complex(&DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, -0.5, 0.2, 0.0, 0.2, 2.0]));
        let sys = LindbladSystem::new(Hamiltonian::Static(h), vec![]).unwrap();
        let psi = CVector::from_vec(vec![ONE, I, ZERO]) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let tr = lindblad_evolve(&sys, &DensityMatrix::pure(&psi), 0.0, &[1.0, 5.0, 20.0], tight()).unwrap();
        for r in &tr.states {
            assert!((r.purity() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn symmetric_thermal_relaxation() {
        let gamma: f64 = 0.7;
        let sp = crate::linalg::ket_bra(2, 1, 0) * Complex64::new(gamma.sqrt(), 0.0);
        let sm = crate::linalg::ket_bra(2, 0, 1) * Complex64::new(gamma.sqrt(), 0.0);
        let sys = LindbladSystem::new(Hamiltonian::Static(CMatrix::zeros(2, 2)), vec![sp, sm]).unwrap();
        let times = [0.2, 1.0, 3.0];
        let tr = lindblad_evolve(&sys, &DensityMatrix::basis(2, 0), 0.0, &times, tight()).unwrap();
        for (t, r) in times.iter().zip(&tr.states) {
            let sz = r.population(1) - r.population(0);
            assert!((sz + (-2.0 * gamma * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let q = DensityMatrix::basis(2, 1);
        let c = DensityMatrix::basis(3, 0);
        let joint = DensityMatrix(kron(&q.0, &c.0));
        let red = joint.trace_out_second(2, 3);
        assert!((red - q.0).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn driven_term_matches_function_form() {
        let x = to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let z = to_complex(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let a = Hamiltonian::Static(z.clone()).with_term(x.clone(), |t| t.cos());
        let b = Hamiltonian::Function(Box::new(move |t| &z + &x * Complex64::new(t.cos(), 0.0)));
        for t in [0.0, 0.3, 2.0] {
            assert!((a.at(t) - b.at(t)).iter().all(|v| v.norm() < 1e-15));
        }
    }

    #[test]
    fn schrodinger_rabi_flip() {
        let x = to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        let psi0 = CVector::from_vec(vec![ONE, ZERO]);
        let (s, _) = schrodinger_evolve(&Hamiltonian::Static(x), &psi0, 0.0, &[std::f64::consts::PI], tight()).unwrap();
        assert!((s[0][1].norm_sqr() - 1.0).abs() < 1e-9);
    }
}
