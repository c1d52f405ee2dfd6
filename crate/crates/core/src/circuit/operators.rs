use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::CircuitParams;
use crate::error::{Error, Result};
use crate::linalg::{spectral_function, CMatrix};

/// Truncation of the oscillator basis. The oscillator length is always
/// recomputed from the circuit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisConfig {
    pub dimension: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { dimension: 120 }
    }
}

impl BasisConfig {
    pub const MIN_DIMENSION: usize = 20;

    pub fn new(dimension: usize) -> Result<Self> {
        let b = Self { dimension };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < Self::MIN_DIMENSION {
            return Err(Error::param(
                "dimension",
                format!("must be at least {}, got {}", Self::MIN_DIMENSION, self.dimension),
            ));
        }
        Ok(())
    }

    pub fn oscillator_length(&self, params: &CircuitParams) -> f64 {
        params.oscillator_length_sq().sqrt()
    }
}

/// Phase and charge operators in the truncated oscillator basis.
///
/// The charge operator is purely imaginary in this basis; it is stored as the
/// real antisymmetric matrix `charge_im` with n̂ = i·`charge_im`.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub ell: f64,
    pub phase: DMatrix<f64>,
    pub charge_im: DMatrix<f64>,
    /// φ̂² and n̂² as truncated matrix products.
    pub phase_sq: DMatrix<f64>,
    pub charge_sq: DMatrix<f64>,
    /// cos φ̂ and sin φ̂ from the eigendecomposition of φ̂.
    pub cos_phase: DMatrix<f64>,
    pub sin_phase: DMatrix<f64>,
    phase_eigenvalues: DVector<f64>,
    phase_eigenvectors: DMatrix<f64>,
}

impl OperatorSet {
    pub fn build(params: &CircuitParams, basis: BasisConfig) -> Result<Self> {
        params.validate()?;
        basis.validate()?;
        let d = basis.dimension;
        let ell = basis.oscillator_length(params);
        let s = std::f64::consts::FRAC_1_SQRT_2;

        let mut phase = DMatrix::zeros(d, d);
        let mut charge_im = DMatrix::zeros(d, d);
        for k in 1..d {
            let a = (k as f64).sqrt();
            phase[(k - 1, k)] = ell * s * a;
            phase[(k, k - 1)] = ell * s * a;
            // i(a† − a)/(ℓ√2): element (k, k−1) from a†, (k−1, k) from −a.
            charge_im[(k, k - 1)] = s * a / ell;
            charge_im[(k - 1, k)] = -s * a / ell;
        }
        let phase_sq = &phase * &phase;
        let charge_sq = -(&charge_im * &charge_im);

        let eig = nalgebra::linalg::SymmetricEigen::try_new(phase.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numerical("phase operator diagonalization failed".into()))?;
        let cos_phase = spectral_function(&eig.eigenvectors, &eig.eigenvalues, f64::cos);
        let sin_phase = spectral_function(&eig.eigenvectors, &eig.eigenvalues, f64::sin);

        Ok(Self {
            ell,
            phase,
            charge_im,
            phase_sq,
            charge_sq,
            cos_phase,
            sin_phase,
            phase_eigenvalues: eig.eigenvalues,
            phase_eigenvectors: eig.eigenvectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.phase.nrows()
    }

    pub fn charge(&self) -> CMatrix {
        self.charge_im.map(|x| Complex64::new(0.0, x))
    }

    /// exp(iφ̂), unitary.
    pub fn displacement(&self) -> CMatrix {
        let u = crate::linalg::to_complex(&self.phase_eigenvectors);
        let mut scaled = u.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, self.phase_eigenvalues[j]);
        }
        scaled * u.adjoint()
    }

    /// cos(φ̂ − φ_ext) = cos φ_ext·cos φ̂ + sin φ_ext·sin φ̂.
    pub fn cos_shifted(&self, phi_ext: f64) -> DMatrix<f64> {
        &self.cos_phase * phi_ext.cos() + &self.sin_phase * phi_ext.sin()
    }

    /// Flux-independent part 4E_C n̂² + (E_L/2) φ̂².
    pub fn inductive_charging(&self, params: &CircuitParams) -> DMatrix<f64> {
        &self.charge_sq * (4.0 * params.e_c) + &self.phase_sq * (0.5 * params.e_l)
    }
}
