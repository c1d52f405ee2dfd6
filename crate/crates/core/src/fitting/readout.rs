use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Qubit levels as seen by the dispersive readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutState {
    G,
    E,
    F,
    H,
}

impl ReadoutState {
    pub const ALL: [ReadoutState; 4] = [Self::G, Self::E, Self::F, Self::H];
}

/// Gaussian single-shot blobs in the IQ plane. The two qubit states share a
/// blob because the dispersive shift between them is unresolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutModel {
    pub center_ge: [f64; 2],
    pub center_f: [f64; 2],
    pub center_h: [f64; 2],
    pub sigma: f64,
    #[serde(default)]
    pub threshold: f64,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self {
            center_ge: [-1.56, 0.2],
            center_f: [3.4, -0.5],
            center_h: [1.23, 0.4],
            sigma: 1.0,
            threshold: 0.0,
        }
    }
}

/// Probabilities of an outcome left of the threshold for each level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conditionals {
    pub g: f64,
    pub e: f64,
    pub h: f64,
}

impl ReadoutModel {
    pub fn validate(&self) -> Result<()> {
        require_positive("sigma", self.sigma)?;
        let finite = self
            .center_ge
            .iter()
            .chain(&self.center_f)
            .chain(&self.center_h)
            .chain(std::iter::once(&self.threshold))
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("center", "blob centers and threshold must be finite"));
        }
        Ok(())
    }

    pub fn center(&self, state: ReadoutState) -> [f64; 2] {
        match state {
            ReadoutState::G | ReadoutState::E => self.center_ge,
            ReadoutState::F => self.center_f,
            ReadoutState::H => self.center_h,
        }
    }

    /// Gaussian tail below the threshold along I.
    pub fn left_probability(&self, state: ReadoutState) -> f64 {
        normal_cdf((self.threshold - self.center(state)[0]) / self.sigma)
    }

    pub fn conditionals(&self) -> Conditionals {
        Conditionals {
            g: self.left_probability(ReadoutState::G),
            e: self.left_probability(ReadoutState::E),
            h: self.left_probability(ReadoutState::H),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IqSamples {
    pub i: Vec<f64>,
    pub q: Vec<f64>,
    pub states: Vec<ReadoutState>,
}

impl IqSamples {
    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn fraction_left(&self, threshold: f64) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        self.i.iter().filter(|&&x| x < threshold).count() as f64 / self.len() as f64
    }
}

/// Draws `n_shots` single-shot outcomes. `populations` is ordered g, e, f, h.
pub fn synthesize_iq(
    populations: [f64; 4],
    model: &ReadoutModel,
    n_shots: usize,
    seed: u64,
) -> Result<IqSamples> {
    model.validate()?;
    if populations.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Input(format!("populations must be non-negative, got {populations:?}")));
    }
    let total: f64 = populations.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Input(format!("populations sum to {total}, expected 1")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, model.sigma).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut cumulative = [0.0; 4];
    let mut acc = 0.0;
    for (c, p) in cumulative.iter_mut().zip(populations) {
        acc += p;
        *c = acc;
    }

    let mut out = IqSamples {
        i: Vec::with_capacity(n_shots),
        q: Vec::with_capacity(n_shots),
        states: Vec::with_capacity(n_shots),
    };
    for _ in 0..n_shots {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cumulative.iter().position(|&c| u < c).unwrap_or(3);
        let state = ReadoutState::ALL[idx];
        let [ci, cq] = model.center(state);
        out.i.push(ci + noise.sample(&mut rng));
        out.q.push(cq + noise.sample(&mut rng));
        out.states.push(state);
    }
    Ok(out)
}
