//! Numerical evaluation of both sides of the Carleman estimates for the HJB
//! equation, the Fokker-Planck equation and the coupled system, with the time
//! weight `e^{2 s phi(t)}`, `phi(t) = e^{lambda t}`.
//!
//! All weights are carried relative to `e^{2 s phi(T)}`: report components are
//! stored divided by that factor and `log_scale = 2 s phi(T)` records it. The
//! ratio is unaffected.

mod evaluate;
mod sweep;
mod weight;

pub use evaluate::{
    evaluate_fp_carleman, evaluate_hjb_carleman, evaluate_mfg_carleman, CarlemanReport,
    Components, Estimate,
};
pub use sweep::{sweep_parameters, CarlemanBundle, LambdaSummary, SweepCell, SweepTable};
pub use weight::{weight_at, CarlemanParams, WeightEval, OVERFLOW_EXPONENT};
