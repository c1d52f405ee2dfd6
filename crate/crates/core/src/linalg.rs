//! Small dense-matrix helpers shared by the circuit and dynamics models.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Bosonic annihilation operator truncated to `dim` Fock states.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// `|row⟩⟨col|` on a space of dimension `dim`.
pub fn ket_bra(dim: usize, row: usize, col: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(row, col)] = ONE;
    m
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

/// Largest absolute entry of `m - m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm of a real matrix.
pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `⟨a|m|b⟩` for real coefficient vectors and a complex operator.
pub fn sandwich(a: &DVector<f64>, m: &CMatrix, b: &DVector<f64>) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..m.nrows() {
        if a[i] == 0.0 {
            continue;
        }
        let mut row = ZERO;
        for j in 0..m.ncols() {
            row += m[(i, j)] * b[j];
        }
        acc += row * a[i];
    }
    acc
}

/// `U f(Λ) Uᵀ` for a real orthogonal `U` and diagonal `Λ`.
pub fn spectral_function<F: Fn(f64) -> f64>(
    vectors: &DMatrix<f64>,
    values: &DVector<f64>,
    f: F,
) -> DMatrix<f64> {
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= f(values[j]);
    }
    scaled * vectors.transpose()
}
