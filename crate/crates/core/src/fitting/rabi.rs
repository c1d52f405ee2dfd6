use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};

/// Ground-state population assumed for the thermal preparation.
pub const PREP_THERMAL: f64 = 0.5;

/// Default number of bootstrap resamples.
pub const DEFAULT_BOOTSTRAP: usize = 200;

const BOUNDARY_LOGIT: f64 = 12.0;

/// Readout conditionals and preparation fidelities entering the Rabi-curve
/// model. Conditionals are probabilities of a "left" outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepFidelity {
    pub p_left_g: f64,
    pub p_left_e: f64,
    pub p_left_h: f64,
    pub prep_g: f64,
    pub prep_e: f64,
}

impl Default for PrepFidelity {
    /// The documented initial guess.
    fn default() -> Self {
        Self {
            p_left_g: 0.95,
            p_left_e: 0.95,
            p_left_h: 0.1,
            prep_g: 0.9,
            prep_e: 0.1,
        }
    }
}

/// Which preparation a curve belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preparation {
    G,
    E,
    Thermal,
}

impl Preparation {
    pub const ALL: [Preparation; 3] = [Self::G, Self::E, Self::Thermal];
}

impl PrepFidelity {
    pub fn to_array(&self) -> [f64; 5] {
        [self.p_left_g, self.p_left_e, self.p_left_h, self.prep_g, self.prep_e]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            p_left_g: a[0],
            p_left_e: a[1],
            p_left_h: a[2],
            prep_g: a[3],
            prep_e: a[4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Input(format!("probabilities must lie in [0, 1]: {self:?}")));
        }
        Ok(())
    }

    pub fn prep_population(&self, prep: Preparation) -> f64 {
        match prep {
            Preparation::G => self.prep_g,
            Preparation::E => self.prep_e,
            Preparation::Thermal => PREP_THERMAL,
        }
    }

    /// Probability of a left outcome after an e-h rotation by `theta`.
    pub fn curve(&self, prep: Preparation, theta: f64) -> f64 {
        let pg = self.prep_population(prep);
        let (lg, le, lh) = (self.p_left_g, self.p_left_e, self.p_left_h);
        pg * (lg + lh) / 2.0 + (1.0 - pg) * le + pg * theta.cos() * (lg - lh) / 2.0
    }

    /// Coefficient of cos θ in [`Self::curve`].
    pub fn cos_coefficient(&self, prep: Preparation) -> f64 {
        self.prep_population(prep) * (self.p_left_g - self.p_left_h) / 2.0
    }
}

/// Three measured curves on a shared rotation-angle grid, ordered as
/// [`Preparation::ALL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiCurves {
    pub theta: Vec<f64>,
    pub left: [Vec<f64>; 3],
}

impl RabiCurves {
    pub fn evaluate(truth: &PrepFidelity, theta: &[f64]) -> Self {
        let left = Preparation::ALL.map(|p| theta.iter().map(|&t| truth.curve(p, t)).collect());
        Self {
            theta: theta.to_vec(),
            left,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.left.iter().any(|c| c.len() != self.theta.len()) {
            return Err(Error::Input("curve lengths differ from the angle grid".into()));
        }
        if self.theta.len() < 3 {
            return Err(Error::Input("need at least three angles per curve".into()));
        }
        let (lo, hi) = self
            .theta
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
        if hi - lo < 2.0 * std::f64::consts::PI * (1.0 - 1e-9) {
            return Err(Error::Input(format!(
                "angle grid spans {:.3} rad, less than one Rabi period",
                hi - lo
            )));
        }
        Ok(())
    }

    fn points(&self) -> Vec<(usize, f64, f64)> {
        self.left
            .iter()
            .enumerate()
            .flat_map(|(j, c)| self.theta.iter().zip(c).map(move |(&t, &y)| (j, t, y)))
            .collect()
    }
}

/// Binomially sampled curves with `shots` single shots per angle.
pub fn synthesize_rabi_curves(
    truth: &PrepFidelity,
    theta: &[f64],
    shots: u64,
    seed: u64,
) -> Result<RabiCurves> {
    truth.validate()?;
    if shots == 0 {
        return Err(Error::param("shots", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = RabiCurves::evaluate(truth, theta);
    for c in curves.left.iter_mut() {
        for y in c.iter_mut() {
            let b = Binomial::new(shots, y.clamp(0.0, 1.0)).map_err(|e| Error::Numerical(e.to_string()))?;
            *y = b.sample(&mut rng) as f64 / shots as f64;
        }
    }
    Ok(curves)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepFidelityFit {
    pub estimate: PrepFidelity,
    pub prep_thermal: f64,
    /// Half the sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub n_bootstrap: usize,
    pub bootstrap_mean: PrepFidelity,
    pub bootstrap_std: PrepFidelity,
    pub boundary_warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiFitOptions {
    pub initial: PrepFidelity,
    pub n_bootstrap: usize,
    pub seed: u64,
    pub lm: LmOptions,
}

impl Default for RabiFitOptions {
    fn default() -> Self {
        Self {
            initial: PrepFidelity::default(),
            n_bootstrap: DEFAULT_BOOTSTRAP,
            seed: 0,
            lm: LmOptions {
                ftol: 1e-14,
                xtol: 1e-12,
                ..LmOptions::default()
            },
        }
    }
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

fn decode(u: &[f64]) -> PrepFidelity {
    PrepFidelity::from_array([logistic(u[0]), logistic(u[1]), logistic(u[2]), logistic(u[3]), logistic(u[4])])
}

fn fit_points(points: &[(usize, f64, f64)], start: &PrepFidelity, lm: LmOptions) -> Result<(Vec<f64>, f64, usize)> {
    let u0: Vec<f64> = start.to_array().iter().map(|&p| logit(p)).collect();
    let res = levenberg_marquardt(
        |u| {
            let m = decode(u);
            points
                .iter()
                .map(|&(j, t, y)| m.curve(Preparation::ALL[j], t) - y)
                .collect()
        },
        &u0,
        lm,
    )?;
    if res.iterations >= lm.max_iterations {
        return Err(Error::Fit {
            iterations: res.iterations,
            cost: res.cost,
        });
    }
    Ok((res.params, res.cost, res.iterations))
}

/// Joint least-squares fit of the three curves, with a point bootstrap for
/// the uncertainties. Resample `b` draws from a ChaCha8 stream `b` of `seed`.
pub fn fit_rabi_curves(data: &RabiCurves, opts: &RabiFitOptions) -> Result<PrepFidelityFit> {
    data.validate()?;
    opts.initial.validate()?;
    let points = data.points();
    let (u, cost, iterations) = fit_points(&points, &opts.initial, opts.lm)?;
    let estimate = decode(&u);

    let names = ["p_left_g", "p_left_e", "p_left_h", "prep_g", "prep_e"];
    let boundary_warnings = u
        .iter()
        .zip(names)
        .filter(|(v, _)| v.abs() > BOUNDARY_LOGIT)
        .map(|(v, name)| format!("{name} = {} is at the edge of [0, 1]", logistic(*v)))
        .collect::<Vec<_>>();
    for w in &boundary_warnings {
        log::warn!("{w}");
    }

    let samples: Vec<[f64; 5]> = (0..opts.n_bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(b as u64);
            let resample: Vec<_> = (0..points.len())
                .map(|_| points[rng.random_range(0..points.len())])
                .collect();
            fit_points(&resample, &estimate, opts.lm).map(|(ub, _, _)| decode(&ub).to_array())
        })
        .collect::<Result<_>>()?;

    let (mean, std) = if samples.is_empty() {
        ([f64::NAN; 5], [f64::NAN; 5])
    } else {
        let n = samples.len() as f64;
        let mut mean = [0.0; 5];
        for s in &samples {
            for k in 0..5 {
                mean[k] += s[k] / n;
            }
        }
        let mut var = [0.0; 5];
        for s in &samples {
            for k in 0..5 {
                var[k] += (s[k] - mean[k]).powi(2) / (n - 1.0).max(1.0);
            }
        }
        (mean, var.map(f64::sqrt))
    };

    Ok(PrepFidelityFit {
        estimate,
        prep_thermal: PREP_THERMAL,
        cost,
        iterations,
        n_bootstrap: samples.len(),
        bootstrap_mean: PrepFidelity::from_array(mean),
        bootstrap_std: PrepFidelity::from_array(std),
        boundary_warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn planted() -> PrepFidelity {
        PrepFidelity {
            p_left_g: 0.9404,
            p_left_e: 0.9587,
            p_left_h: 0.1099,
            prep_g: 0.9767,
            prep_e: 0.0231,
        }
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| 2.0 * PI * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn ideal_readout_amplitude_is_preparation() {
        let m = PrepFidelity {
            p_left_g: 1.0,
            p_left_e: 1.0,
            p_left_h: 0.0,
            prep_g: 0.8,
            prep_e: 0.3,
        };
        for prep in Preparation::ALL {
            let amp = m.curve(prep, 0.0) - m.curve(prep, PI);
            assert!((amp - m.prep_population(prep)).abs() < 1e-15);
        }
    }

    #[test]
    fn curve_affine_in_cos() {
        let m = planted();
        for prep in Preparation::ALL {
            let c0 = m.curve(prep, PI / 2.0);
            for t in [0.3, 1.4, 2.9, 4.4] {
                let pred = c0 + m.cos_coefficient(prep) * f64::cos(t);
                assert!((m.curve(prep, t) - pred).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn noiseless_round_trip() {
        let data = RabiCurves::evaluate(&planted(), &grid(41));
        let fit = fit_rabi_curves(
            &data,
            &RabiFitOptions {
                n_bootstrap: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(fit.cost < 1e-10);
        for (a, b) in fit.estimate.to_array().iter().zip(planted().to_array()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn short_grid_rejected() {
        let theta: Vec<f64> = (0..10).map(|k| k as f64 * 0.3).collect();
        assert!(fit_rabi_curves(&RabiCurves::evaluate(&planted(), &theta), &RabiFitOptions::default()).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let data = synthesize_rabi_curves(&planted(), &grid(31), 2000, 3).unwrap();
        let opts = RabiFitOptions {
            n_bootstrap: 20,
            seed: 5,
            ..Default::default()
        };
        let a = fit_rabi_curves(&data, &opts).unwrap();
        let b = fit_rabi_curves(&data, &opts).unwrap();
        assert_eq!(a, b);
    }
}
