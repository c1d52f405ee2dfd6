use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("eigensolver residual {residual:e} exceeds tolerance {tolerance:e}")]
    Eigen { residual: f64, tolerance: f64 },

    #[error(
        "integrator step underflow at t = {t:e} (step {step:e}, error norm {error_norm:e}, {steps} steps taken)"
    )]
    Stiffness {
        t: f64,
        step: f64,
        error_norm: f64,
        steps: usize,
    },

    #[error("fit did not converge after {iterations} iterations (cost {cost:e})")]
    Fit { iterations: usize, cost: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("unstable operating point: {0}")]
    Stability(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical routine (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eigen { .. }
                | Error::Stiffness { .. }
                | Error::Fit { .. }
                | Error::Calibration(_)
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fails with a parameter error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and >= 0, got {value}")))
    }
}
