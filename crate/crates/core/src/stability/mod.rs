//! Backward-problem experiments: pairs of nonlinear solutions with perturbed data,
//! intermediate-time errors against final-data discrepancies, and the closed-form
//! Hölder exponent and parameter choice.

mod experiment;
mod formulas;

pub use experiment::{
    a_priori_bound, compute_data_norm_d, compute_data_norm_d0, final_discrepancy, generate_pair,
    run_holder_experiment, run_log_experiment, DataProfile, ProblemSpec, StabilityKind,
    StabilityRecord, StabilityResult,
};
pub use formulas::{optimal_s, theoretical_theta};
