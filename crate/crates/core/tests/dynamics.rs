use fluxsense::dynamics::{
    bloch_closed_form, bloch_rhs, detector_response, effective_loss_rates, lindblad_evolve, steady_preparation,
    DensityMatrix, Hamiltonian, LindbladSystem, PiecewiseLinear, QubitDissipation,
};
use fluxsense::linalg::CMatrix;
use fluxsense::ode::Stepping;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn hermitian(re: &[f64], im: &[f64], n: usize) -> CMatrix {
    let a = DMatrix::from_fn(n, n, |i, j| Complex64::new(re[i * n + j], im[i * n + j]));
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bloch_norm_contracts_at_twice_gamma(
        omega_r in 0.0..2e6f64,
        delta in -2e6..2e6f64,
        gamma in 0.0..1e5f64,
        t in 0.0..50e-6f64,
    ) {
        let s = bloch_closed_form(omega_r, delta, gamma, t);
        let expected = (-2.0 * gamma * t).exp();
        prop_assert!((s.norm() - expected).abs() <= 1e-9);
    }

    #[test]
    fn bloch_closed_form_satisfies_its_equations(
        omega_r in 1e4..2e6f64,
        delta in -2e6..2e6f64,
        gamma in 0.0..1e5f64,
        t in 1e-6..30e-6f64,
    ) {
        let h = 1e-10;
        let a = bloch_closed_form(omega_r, delta, gamma, t - h).as_array();
        let b = bloch_closed_form(omega_r, delta, gamma, t + h).as_array();
        let s = bloch_closed_form(omega_r, delta, gamma, t).as_array();
        let rhs = bloch_rhs(omega_r, delta, gamma, s);
        let scale = omega_r.hypot(delta) + gamma;
        for k in 0..3 {
            let fd = (b[k] - a[k]) / (2.0 * h);
            prop_assert!((fd - rhs[k]).abs() <= 1e-5 * scale, "component {k}: {fd} vs {}", rhs[k]);
        }
    }

    #[test]
    fn detector_response_bounded(delta in -1e7..1e7f64, omega_r in 0.0..1e4f64, tau in 1e-6..50e-6f64) {
        let r = detector_response(delta, omega_r, tau).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.exact));
        prop_assert!(r.approx.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn lorentzian_half_width_is_kappa_over_two(kappa in 1e5..1e8f64, coupling in 1e3..1e5f64) {
        let alpha = Complex64::new(1.0, 0.0);
        let omega = 1e7;
        let peak = effective_loss_rates(1.0, coupling, alpha, kappa, omega, omega).unwrap().rate_lower;
        let half = effective_loss_rates(1.0, coupling, alpha, kappa, omega + 0.5 * kappa, omega).unwrap().rate_lower;
        prop_assert!((half / peak - 0.5).abs() < 1e-12);
        prop_assert!((peak - 4.0 * coupling * coupling / kappa).abs() <= 1e-12 * peak);
    }

    #[test]
    fn steady_fidelity_bounds(rate in 0.0..1e6f64, gamma in 1.0..1e5f64) {
        let p = steady_preparation(rate, gamma).unwrap();
        prop_assert!((0.5..=1.0).contains(&p.fidelity));
        prop_assert!(p.fidelity >= p.fidelity_leading_order);
    }

    #[test]
    fn ramp_interpolates_between_knots(a in -1.0..1.0f64, b in -1.0..1.0f64, u in 0.0..1.0f64) {
        let r = PiecewiseLinear::new(vec![(0.0, a), (2.0, b)]).unwrap();
        prop_assert!((r.value(2.0 * u) - (a + u * (b - a))).abs() < 1e-12);
        prop_assert_eq!(r.value(5.0), b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lindblad_preserves_trace_and_positivity(
        re in proptest::collection::vec(-1.0..1.0f64, 9),
        im in proptest::collection::vec(-1.0..1.0f64, 9),
        gamma in 0.01..0.5f64,
        gamma_phi in 0.0..0.5f64,
    ) {
        let h = hermitian(&re, &im, 3);
        let diss = QubitDissipation { gamma, gamma_phi };
        let sys = LindbladSystem::new(Hamiltonian::Static(h), diss.loss_ops(3)).unwrap();
        let times: Vec<f64> = (1..=20).map(|k| 0.5 * k as f64).collect();
        let traj = lindblad_evolve(&sys, &DensityMatrix::basis(3, 0), 0.0, &times, Stepping::default()).unwrap();
        for rho in &traj.states {
            prop_assert!((rho.trace() - 1.0).abs() < 1e-8);
            prop_assert!(rho.min_eigenvalue() > -1e-8);
            prop_assert!((&rho.0 - rho.0.adjoint()).camax() < 1e-10);
        }
    }
}

#[test]
fn symmetric_relaxation_equalizes_populations() {
    let diss = QubitDissipation::from_t1(1.0).unwrap();
    let sys = LindbladSystem::new(Hamiltonian::Static(CMatrix::zeros(2, 2)), diss.loss_ops(2)).unwrap();
    let times = [0.5, 1.0, 2.0, 10.0];
    let traj = lindblad_evolve(&sys, &DensityMatrix::basis(2, 1), 0.0, &times, Stepping::default()).unwrap();
    for (t, rho) in times.iter().zip(&traj.states) {
        let want = 0.5 + 0.5 * (-t / 1.0f64).exp();
        assert!((rho.population(1) - want).abs() < 1e-7, "t = {t}");
    }
}

#[test]
fn invalid_dissipation_rejected() {
    assert!(QubitDissipation::from_t1(0.0).is_err());
    assert!(QubitDissipation { gamma: -1.0, gamma_phi: 0.0 }.validate().is_err());
    assert!(steady_preparation(0.0, 0.0).is_err());
}
