use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{FluxBias, Fluxonium};
use crate::error::{require_non_negative, Error, Result};
use crate::linalg::{ket_bra, CMatrix};

/// Symmetric thermal relaxation (Γ↑ = Γ↓ = Γ) plus pure dephasing, in 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitDissipation {
    pub gamma: f64,
    pub gamma_phi: f64,
}

impl QubitDissipation {
    /// Γ = 1/(2T₁) with the default Γ_φ = Γ/2.
    pub fn from_t1(t1: f64) -> Result<Self> {
        crate::error::require_positive("T1", t1)?;
        let gamma = 0.5 / t1;
        Ok(Self {
            gamma,
            gamma_phi: 0.5 * gamma,
        })
    }

    pub fn validate(&self) -> Result<()> {
        require_non_negative("Gamma", self.gamma)?;
        require_non_negative("Gamma_phi", self.gamma_phi)
    }

    pub fn t1(&self) -> f64 {
        0.5 / self.gamma
    }

    /// Transverse decay time 1/(Γ + Γ_φ).
    pub fn t2(&self) -> f64 {
        1.0 / (self.gamma + self.gamma_phi)
    }

    /// √Γ σ⁺, √Γ σ⁻ and √(2Γ_φ)·|e⟩⟨e| acting on levels 0 and 1 of a
    /// `dim`-level system (dephasing written so that coherences decay at Γ_φ).
    pub fn loss_ops(&self, dim: usize) -> Vec<CMatrix> {
        let mut ops = Vec::new();
        if self.gamma > 0.0 {
            let s = Complex64::new(self.gamma.sqrt(), 0.0);
            ops.push(ket_bra(dim, 1, 0) * s);
            ops.push(ket_bra(dim, 0, 1) * s);
        }
        if self.gamma_phi > 0.0 {
            ops.push(ket_bra(dim, 1, 1) * Complex64::new((2.0 * self.gamma_phi).sqrt(), 0.0));
        }
        ops
    }
}

/// The fluxonium projected onto its `levels` lowest eigenstates at a
/// reference flux. Flux-dependent Hamiltonians are formed in that fixed basis
/// so they stay valid for small flux excursions.
#[derive(Debug, Clone)]
pub struct QubitModel {
    pub reference: FluxBias,
    /// Energies at the reference flux, ascending, in Hz (E/h).
    pub energies: Vec<f64>,
    static_part: DMatrix<f64>,
    cos_phase: DMatrix<f64>,
    sin_phase: DMatrix<f64>,
    pub phase: DMatrix<f64>,
    /// n̂ = i·`charge_im`.
    pub charge_im: DMatrix<f64>,
    e_j: f64,
}

impl QubitModel {
    pub fn project(circuit: &Fluxonium, reference: FluxBias, levels: usize) -> Result<Self> {
        if !(2..=circuit.basis.dimension).contains(&levels) {
            return Err(Error::param("levels", format!("must be in 2..=D, got {levels}")));
        }
        let sol = circuit.solve(reference, levels)?;
        let v = &sol.states;
        let proj = |m: &DMatrix<f64>| v.transpose() * m * v;
        Ok(Self {
            reference,
            energies: sol.energies.clone(),
            static_part: proj(circuit.static_hamiltonian()),
            cos_phase: proj(&circuit.ops.cos_phase),
            sin_phase: proj(&circuit.ops.sin_phase),
            phase: proj(&circuit.ops.phase),
            charge_im: proj(&circuit.ops.charge_im),
            e_j: circuit.params.e_j,
        })
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    /// Angular ω_ij = 2π(E_j − E_i) at the reference flux.
    pub fn omega(&self, i: usize, j: usize) -> f64 {
        TAU * (self.energies[j] - self.energies[i])
    }

    /// Projected Hamiltonian at flux `phi_ext` in rad/s, with the reference
    /// ground energy subtracted.
    pub fn hamiltonian(&self, phi_ext: f64) -> DMatrix<f64> {
        let mut h = &self.static_part
            - (&self.cos_phase * phi_ext.cos() + &self.sin_phase * phi_ext.sin()) * self.e_j;
        for i in 0..h.nrows() {
            h[(i, i)] -= self.energies[0];
        }
        h * TAU
    }

    /// Diagonal Hamiltonian at the reference flux in rad/s, ground energy zero.
    pub fn diagonal_hamiltonian(&self) -> CMatrix {
        let n = self.levels();
        let mut h = CMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(TAU * (self.energies[i] - self.energies[0]), 0.0);
        }
        h
    }

    pub fn charge(&self) -> CMatrix {
        self.charge_im.map(|x| Complex64::new(0.0, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{BasisConfig, CircuitParams};

    #[test]
    fn projection_is_diagonal_at_reference() {
        let c = Fluxonium::new(CircuitParams::reference_device(), BasisConfig::new(100).unwrap()).unwrap();
        let m = QubitModel::project(&c, FluxBias::FRUSTRATION, 4).unwrap();
        let h = m.hamiltonian(FluxBias::FRUSTRATION.radians());
        let d = m.diagonal_hamiltonian();
        for i in 0..4 {
            for j in 0..4 {
                assert!((h[(i, j)] - d[(i, j)].re).abs() < 1e-6 * TAU * 1e9, "({i},{j})");
            }
        }
        assert!((m.omega(0, 1) / TAU - 1.806e6).abs() < 5e3);
    }

    #[test]
    fn dissipation_defaults() {
        let d = QubitDissipation::from_t1(34e-6).unwrap();
        assert!((d.t1() - 34e-6).abs() < 1e-18);
        assert!((d.gamma_phi - d.gamma / 2.0).abs() < 1e-9);
        assert_eq!(d.loss_ops(3).len(), 3);
    }
}
