use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::frobenius;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Level {
    G,
    E,
    F,
    H,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::G, Level::E, Level::F, Level::H];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> char {
        ['g', 'e', 'f', 'h'][self.index()]
    }
}

/// Lowest eigenpairs in ascending energy order. Labels g, e, f, h are the
/// indices 0..3.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub energies: Vec<f64>,
    /// Eigenvectors as columns.
    pub states: DMatrix<f64>,
    /// Largest ‖Hv − Ev‖ over the returned pairs.
    pub max_residual: f64,
}

impl EigenSolution {
    pub fn energy(&self, l: Level) -> f64 {
        self.energies[l.index()]
    }

    pub fn state(&self, l: Level) -> DVector<f64> {
        self.states.column(l.index()).into_owned()
    }

    /// `E_j − E_i`.
    pub fn transition(&self, i: Level, j: Level) -> f64 {
        self.energy(j) - self.energy(i)
    }
}

/// Diagonalize a real symmetric Hamiltonian and keep the `k` lowest pairs.
///
/// Each eigenvector is signed so that its largest-magnitude coefficient is
/// positive (the first such coefficient on ties).
pub fn diagonalize_and_label(h: &DMatrix<f64>, k: usize) -> Result<EigenSolution> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(Error::Input(format!("Hamiltonian is {}×{}", d, h.ncols())));
    }
    if k == 0 || k > d {
        return Err(Error::Input(format!("requested {k} eigenpairs of a {d}-dimensional space")));
    }
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut energies = Vec::with_capacity(k);
    let mut states = DMatrix::zeros(d, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        energies.push(eig.eigenvalues[idx]);
        let mut v = eig.eigenvectors.column(idx).into_owned();
        fix_sign(&mut v);
        states.set_column(c, &v);
    }

    let norm = frobenius(h).max(f64::MIN_POSITIVE);
    let mut max_residual: f64 = 0.0;
    for c in 0..k {
        let v = states.column(c);
        let r = (h * v - v * energies[c]).norm();
        max_residual = max_residual.max(r);
    }
    let tolerance = 1e-9 * norm;
    if !(max_residual <= tolerance) {
        return Err(Error::Eigen {
            residual: max_residual,
            tolerance,
        });
    }
    Ok(EigenSolution {
        energies,
        states,
        max_residual,
    })
}

fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascending_and_orthonormal() {
        let h = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let s = diagonalize_and_label(&h, 3).unwrap();
        assert!(s.energies.windows(2).all(|w| w[0] <= w[1]));
        let g = s.states.transpose() * &s.states;
        assert!((g - DMatrix::identity(3, 3)).abs().max() < 1e-12);
        assert!(s.max_residual < 1e-12);
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = diagonalize_and_label(&h, 2).unwrap();
        let flipped = diagonalize_and_label(&(-(-h.clone())), 2).unwrap();
        assert_eq!(s.states, flipped.states);
        for c in 0..2 {
            let col = s.states.column(c);
            let imax = col.iamax();
            assert!(col[imax] > 0.0);
        }
    }

    #[test]
    fn too_many_pairs_rejected() {
        let h = DMatrix::<f64>::identity(2, 2);
        assert!(diagonalize_and_label(&h, 3).is_err());
    }
}
