use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Exponents of `e` beyond which a weight is flagged as overflowing.
pub const OVERFLOW_EXPONENT: f64 = 700.0;

/// Large parameters `(s, lambda)` of the weight `e^{2 s phi(t)}`, `phi(t) = e^{lambda t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlemanParams {
    pub s: f64,
    pub lambda: f64,
}

impl CarlemanParams {
    pub fn new(s: f64, lambda: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(invalid("s", format!("{s} must be positive")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid("lambda", format!("{lambda} must be positive")));
        }
        Ok(Self { s, lambda })
    }

    pub fn phi(&self, t: f64) -> f64 {
        (self.lambda * t).exp()
    }

    /// `alpha(t0) = phi(t0) - 1`.
    pub fn alpha(&self, t0: f64) -> f64 {
        (self.lambda * t0).exp_m1()
    }

    /// `2 s phi(t)`, the exponent of the weight.
    pub fn log_weight(&self, t: f64) -> f64 {
        2.0 * self.s * self.phi(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightEval {
    pub phi: f64,
    pub log_weight: f64,
    /// `e^{2 s phi(t)}`; infinite once it leaves the `f64` range.
    pub weight: f64,
    pub overflow: bool,
}

/// `phi(t)` and `e^{2 s phi(t)}`, flagging exponents above [`OVERFLOW_EXPONENT`].
pub fn weight_at(params: &CarlemanParams, t: f64) -> WeightEval {
    let phi = params.phi(t);
    let log_weight = 2.0 * params.s * phi;
    WeightEval {
        phi,
        log_weight,
        weight: log_weight.exp(),
        overflow: log_weight > OVERFLOW_EXPONENT,
    }
}
