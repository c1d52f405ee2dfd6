use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::eigen::{diagonalize_and_label, EigenSolution, Level};
use super::operators::{BasisConfig, OperatorSet};
use super::params::{CircuitParams, FluxBias};
use crate::error::Result;

/// A fluxonium circuit with its operators prebuilt for a given basis.
#[derive(Debug, Clone)]
pub struct Fluxonium {
    pub params: CircuitParams,
    pub basis: BasisConfig,
    pub ops: OperatorSet,
    static_part: DMatrix<f64>,
}

impl Fluxonium {
    pub fn new(params: CircuitParams, basis: BasisConfig) -> Result<Self> {
        let ops = OperatorSet::build(&params, basis)?;
        let static_part = ops.inductive_charging(&params);
        Ok(Self {
            params,
            basis,
            ops,
            static_part,
        })
    }

    /// H = −E_J cos(φ̂ − φ_ext) + 4E_C n̂² + (E_L/2) φ̂², in Hz.
    pub fn hamiltonian(&self, flux: FluxBias) -> DMatrix<f64> {
        &self.static_part - self.ops.cos_shifted(flux.radians()) * self.params.e_j
    }

    /// Flux-independent part of the Hamiltonian.
    pub fn static_hamiltonian(&self) -> &DMatrix<f64> {
        &self.static_part
    }

    pub fn solve(&self, flux: FluxBias, k: usize) -> Result<EigenSolution> {
        diagonalize_and_label(&self.hamiltonian(flux), k)
    }

    pub fn transitions(&self, flux: FluxBias) -> Result<TransitionTable> {
        Ok(TransitionTable::from_solution(flux, &self.solve(flux, 4)?))
    }

    pub fn matrix_elements(&self, flux: FluxBias) -> Result<MatrixElements> {
        let sol = self.solve(flux, 4)?;
        Ok(matrix_elements(&sol, &self.ops, flux))
    }
}

/// Transition frequencies among the four lowest levels, in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionTable {
    pub phi_ext: f64,
    pub f_ge: f64,
    pub f_gf: f64,
    pub f_gh: f64,
    pub f_ef: f64,
    pub f_eh: f64,
    pub f_fh: f64,
}

impl TransitionTable {
    pub fn from_solution(flux: FluxBias, sol: &EigenSolution) -> Self {
        use Level::*;
        Self {
            phi_ext: flux.radians(),
            f_ge: sol.transition(G, E),
            f_gf: sol.transition(G, F),
            f_gh: sol.transition(G, H),
            f_ef: sol.transition(E, F),
            f_eh: sol.transition(E, H),
            f_fh: sol.transition(F, H),
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.f_ge, self.f_gf, self.f_gh, self.f_ef, self.f_eh, self.f_fh]
    }
}

/// Qubit splitting at the frustration point, in Hz.
pub fn tunnel_splitting(circuit: &Fluxonium) -> Result<f64> {
    Ok(circuit.transitions(FluxBias::FRUSTRATION)?.f_ge)
}

/// Matrix elements among g, e, f, h (row = bra, column = ket).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElements {
    pub phi_el: [[Complex64; 4]; 4],
    pub charge_el: [[Complex64; 4]; 4],
    pub cos_el: [[Complex64; 4]; 4],
    pub c_0: f64,
    pub c_x: f64,
    pub c_z: f64,
    /// E_e − E_g in Hz, kept for the charge–flux identity.
    pub f_ge: f64,
}

impl MatrixElements {
    pub fn phi(&self, i: Level, j: Level) -> Complex64 {
        self.phi_el[i.index()][j.index()]
    }

    pub fn charge(&self, i: Level, j: Level) -> Complex64 {
        self.charge_el[i.index()][j.index()]
    }

    /// |ω_ge⟨e|φ̂|g⟩| and |8E_C⟨e|n̂|g⟩| in Hz; equal for exact eigenstates.
    pub fn charge_flux_identity(&self, e_c: f64) -> (f64, f64) {
        (
            (self.f_ge * self.phi(Level::E, Level::G)).norm(),
            (8.0 * e_c * self.charge(Level::E, Level::G)).norm(),
        )
    }
}

pub fn matrix_elements(sol: &EigenSolution, ops: &OperatorSet, flux: FluxBias) -> MatrixElements {
    let v = sol.states.columns(0, 4);
    let phi = v.transpose() * &ops.phase * v;
    let chg = v.transpose() * &ops.charge_im * v;
    let cos = v.transpose() * ops.cos_shifted(flux.radians()) * v;
    let mut phi_el = [[Complex64::new(0.0, 0.0); 4]; 4];
    let mut charge_el = phi_el;
    let mut cos_el = phi_el;
    for i in 0..4 {
        for j in 0..4 {
            phi_el[i][j] = Complex64::new(phi[(i, j)], 0.0);
            charge_el[i][j] = Complex64::new(0.0, chg[(i, j)]);
            cos_el[i][j] = Complex64::new(cos[(i, j)], 0.0);
        }
    }
    MatrixElements {
        phi_el,
        charge_el,
        cos_el,
        c_0: 0.5 * (cos[(0, 0)] + cos[(1, 1)]),
        c_x: cos[(0, 1)],
        c_z: 0.5 * (cos[(1, 1)] - cos[(0, 0)]),
        f_ge: sol.transition(Level::G, Level::E),
    }
}

/// Eigen-solutions along a flux grid, computed in parallel.
///
/// Where two returned levels are degenerate to `1e-9` relative, the pair is
/// ordered (and signed) by overlap with the previous grid point.
pub fn sweep_solutions(circuit: &Fluxonium, grid: &[FluxBias], k: usize) -> Vec<Result<EigenSolution>> {
    let mut sols: Vec<Result<EigenSolution>> = grid.par_iter().map(|&f| circuit.solve(f, k)).collect();
    for i in 1..sols.len() {
        let (head, tail) = sols.split_at_mut(i);
        if let (Ok(prev), Ok(cur)) = (&head[i - 1], &mut tail[0]) {
            align_degenerate(prev, cur);
        }
    }
    sols
}

fn align_degenerate(prev: &EigenSolution, cur: &mut EigenSolution) {
    let k = cur.energies.len();
    let scale = cur.energies.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1.0);
    for a in 0..k.saturating_sub(1) {
        let b = a + 1;
        if (cur.energies[b] - cur.energies[a]).abs() > 1e-9 * scale {
            continue;
        }
        let pa = prev.states.column(a);
        let keep = pa.dot(&cur.states.column(a)).abs();
        let swap = pa.dot(&cur.states.column(b)).abs();
        if swap > keep {
            cur.states.swap_columns(a, b);
            cur.energies.swap(a, b);
        }
        for c in [a, b] {
            if prev.states.column(c).dot(&cur.states.column(c)) < 0.0 {
                let mut v = cur.states.column(c).into_owned();
                v.neg_mut();
                cur.states.set_column(c, &v);
            }
        }
    }
}

/// Transition tables along a flux grid. Failures are reported per point and
/// do not stop the sweep.
pub fn spectrum_vs_flux(circuit: &Fluxonium, grid: &[FluxBias]) -> Vec<Result<TransitionTable>> {
    grid.par_iter().map(|&f| circuit.transitions(f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn device(d: usize) -> Fluxonium {
        Fluxonium::new(CircuitParams::reference_device(), BasisConfig::new(d).unwrap()).unwrap()
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let c = device(60);
        let h = c.hamiltonian(FluxBias::new(1.1).unwrap());
        let defect = (&h - h.transpose()).abs().max();
        assert!(defect <= 1e-12 * crate::linalg::frobenius(&h));
    }

    #[test]
    fn bare_oscillator_spacing() {
        let p = CircuitParams::reference_device();
        let c = Fluxonium::new(p, BasisConfig::new(40).unwrap()).unwrap();
        let sol = diagonalize_and_label(c.static_hamiltonian(), 6).unwrap();
        let w = p.plasma_frequency();
        for k in 1..6 {
            assert!(((sol.energies[k] - sol.energies[k - 1]) / w - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn frustration_point_spectrum() {
        let c = device(120);
        let t = c.transitions(FluxBias::FRUSTRATION).unwrap();
        assert!((t.f_ge - 1.806e6).abs() < 5e3, "f_ge = {}", t.f_ge);
        assert!((t.f_ef / 3.707e9 - 1.0).abs() < 1e-3);
        assert!(((t.f_ge + t.f_eh) / t.f_gh - 1.0).abs() < 1e-10);
    }

    #[test]
    fn parity_cancels_cx_at_frustration() {
        let c = device(120);
        let m = c.matrix_elements(FluxBias::FRUSTRATION).unwrap();
        assert!(m.c_x.abs() < 1e-8 * m.c_0.abs());
        let phi = m.phi(Level::G, Level::E).norm();
        assert!((2.7..3.5).contains(&phi), "|phi_ge| = {phi}");
    }

    #[test]
    fn flux_mirror_symmetry() {
        let c = device(80);
        for d in [0.01, 0.3, 1.0] {
            let a = c.transitions(FluxBias::new(PI + d).unwrap()).unwrap();
            let b = c.transitions(FluxBias::new(PI - d).unwrap()).unwrap();
            for (x, y) in a.as_array().iter().zip(b.as_array()) {
                assert!((x - y).abs() <= 1e-7 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn sweep_reports_every_point() {
        let c = device(60);
        let grid: Vec<_> = (0..5).map(|i| FluxBias::new(PI + 0.1 * i as f64).unwrap()).collect();
        let out = spectrum_vs_flux(&c, &grid);
        assert_eq!(out.len(), 5);
        assert!(out.iter().all(|r| r.is_ok()));
        let sols = sweep_solutions(&c, &grid, 4);
        assert!(sols.iter().all(|r| r.is_ok()));
    }
}
