use std::f64::consts::PI;

use fluxsense::fitting::{
    boltzmann_ratio, fit_rabi_curves, fit_ramsey, fit_relaxation, pure_dephasing_rate, synthesize_rabi_curves,
    temperature_from_populations, thermal_ground_probability, Histogram, PrepFidelity, Preparation, RabiCurves,
    RabiFitOptions, TemperatureMode, TemperatureStatus,
};
use proptest::prelude::*;

fn truth() -> PrepFidelity {
    PrepFidelity::from_array([0.94, 0.96, 0.11, 0.98, 0.02])
}

fn theta() -> Vec<f64> {
    (0..61).map(|k| 2.0 * PI * k as f64 / 60.0).collect()
}

fn opts(n_bootstrap: usize) -> RabiFitOptions {
    RabiFitOptions {
        n_bootstrap,
        ..RabiFitOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prep_temperature_round_trips(t in 1e-6..1e-3f64, f in 1e5..1e8f64) {
        let p = thermal_ground_probability(t, f).unwrap();
        prop_assume!(p < 1.0 - 1e-9);
        let est = temperature_from_populations(p, f, TemperatureMode::TwoLevelPrep).unwrap();
        prop_assert_eq!(est.status, TemperatureStatus::Finite);
        prop_assert!((est.temperature.unwrap() / t - 1.0).abs() < 1e-6);
    }

    #[test]
    fn manifold_temperature_round_trips(t in 1e-3..1.0f64, f in 1e8..1e10f64) {
        let r = boltzmann_ratio(t, f).unwrap();
        let est = temperature_from_populations(r, f, TemperatureMode::Manifold).unwrap();
        prop_assert!((est.temperature.unwrap() / t - 1.0).abs() < 1e-9);
    }

    #[test]
    fn temperature_decreases_with_ground_population(a in 0.51..0.999f64, b in 0.51..0.999f64) {
        prop_assume!((a - b).abs() > 1e-6);
        let f = 1.8e6;
        let ta = temperature_from_populations(a, f, TemperatureMode::TwoLevelPrep).unwrap().temperature.unwrap();
        let tb = temperature_from_populations(b, f, TemperatureMode::TwoLevelPrep).unwrap().temperature.unwrap();
        prop_assert_eq!(a > b, ta < tb);
    }

    #[test]
    fn rabi_curves_are_affine_in_cosine(t in 0.0..2.0 * PI, j in 0usize..3) {
        let m = truth();
        let prep = Preparation::ALL[j];
        let a = m.curve(prep, t);
        let b = m.curve(prep, t + PI);
        let mean = 0.5 * (m.curve(prep, 0.0) + m.curve(prep, PI));
        prop_assert!((0.5 * (a + b) - mean).abs() < 1e-12);
        let amp = 0.5 * (m.curve(prep, 0.0) - m.curve(prep, PI));
        prop_assert!((amp.abs() - m.cos_coefficient(prep).abs()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn noiseless_rabi_fit_is_exact(
        g in 0.8..0.99f64, e in 0.8..0.99f64, h in 0.05..0.3f64, pg in 0.7..0.99f64, pe in 0.01..0.2f64,
    ) {
        let truth = PrepFidelity::from_array([g, e, h, pg, pe]);
        let data = RabiCurves::evaluate(&truth, &theta());
        let fit = fit_rabi_curves(&data, &opts(0)).unwrap();
        for (a, b) in fit.estimate.to_array().iter().zip(truth.to_array()) {
            prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
}

#[test]
fn bootstrap_spread_scales_as_inverse_root_shots() {
    let spread = |shots| {
        let data = synthesize_rabi_curves(&truth(), &theta(), shots, 4).unwrap();
        let fit = fit_rabi_curves(&data, &opts(150)).unwrap();
        fit.bootstrap_std.to_array()
    };
    let coarse = spread(1000);
    let fine = spread(16000);
    for (c, f) in coarse.iter().zip(fine) {
        let ratio = c / f;
        assert!((2.5..=6.0).contains(&ratio), "ratio {ratio}, expected 4");
    }
}

#[test]
fn rabi_fit_is_reproducible() {
    let data = synthesize_rabi_curves(&truth(), &theta(), 5000, 1).unwrap();
    let a = fit_rabi_curves(&data, &opts(30)).unwrap();
    let b = fit_rabi_curves(&data, &opts(30)).unwrap();
    assert_eq!(a, b);
    let again = synthesize_rabi_curves(&truth(), &theta(), 5000, 1).unwrap();
    assert_eq!(data, again);
}

#[test]
fn noiseless_relaxation_fit_is_exact() {
    let t1 = 34e-6;
    let times: Vec<f64> = (0..120).map(|k| k as f64 * 2e-6).collect();
    let excited: Vec<f64> = times.iter().map(|t| 0.5 + 0.45 * (-t / t1).exp()).collect();
    let ground: Vec<f64> = times.iter().map(|t| 0.5 - 0.40 * (-t / t1).exp()).collect();
    let fit = fit_relaxation(&times, &excited, &ground).unwrap();
    assert!((fit.t1 / t1 - 1.0).abs() < 1e-6);
    assert!((fit.asymptote - 0.5).abs() < 1e-8);
    assert!((fit.gamma * 2.0 * fit.t1 - 1.0).abs() < 1e-12);
}

#[test]
fn noiseless_ramsey_fit_is_exact() {
    let (t2, f) = (40e-6, 0.9e6);
    let times: Vec<f64> = (0..2000).map(|k| k as f64 * 60e-9).collect();
    let y: Vec<f64> = times
        .iter()
        .map(|t| 0.5 + 0.4 * (-t / t2).exp() * (2.0 * PI * f * t + 0.3).cos())
        .collect();
    let fit = fit_ramsey(&times, &y).unwrap();
    assert!((fit.t2_star / t2 - 1.0).abs() < 1e-6);
    assert!((fit.frequency / f - 1.0).abs() < 1e-8);
    assert!((fit.offset - 0.5).abs() < 1e-8);
}

#[test]
fn dephasing_rate_and_bad_input() {
    assert!((pure_dephasing_rate(20e-6, 40e-6) - 0.0).abs() < 1e-9);
    assert!((pure_dephasing_rate(34e-6, 20e-6) - (1.0 / 20e-6 - 1.0 / 68e-6)).abs() < 1e-6);
    assert!(temperature_from_populations(1.0, 1e6, TemperatureMode::TwoLevelPrep).is_err());
    assert_eq!(
        temperature_from_populations(0.4, 1e6, TemperatureMode::TwoLevelPrep).unwrap().status,
        TemperatureStatus::Inverted
    );
    let times = [0.0, 1.0, 2.0];
    assert!(fit_relaxation(&times, &[1.0; 3], &[0.0; 3]).is_err());
}

#[test]
fn histogram_counts_values_in_range() {
    let values: Vec<f64> = (0..1000).map(|k| k as f64 / 100.0 - 5.0).collect();
    let h = Histogram::from_values(&values, -2.0, 2.0, 40).unwrap();
    assert_eq!(h.bins(), 40);
    assert_eq!(h.total(), 400);
    assert!((h.width() - 0.1).abs() < 1e-15);
    assert!((h.center(0) + 1.95).abs() < 1e-12);
}
