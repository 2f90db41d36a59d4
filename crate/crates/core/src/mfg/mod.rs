//! Coupled HJB / Fokker-Planck solvers: the linearized system, the nonlinear system
//! with quadratic Hamiltonian, the coefficients of the difference of two solutions,
//! and the coefficient-bound checker.

mod coefficients;
mod picard;

pub use coefficients::{
    check_coefficient_bounds, form_difference_coefficients, BoundEntry, BoundReport,
    DifferenceSystem, MfgCoefficients,
};
pub use picard::{
    linearized_residual, nonlinear_residual, solve_linearized_mfg, solve_nonlinear_mfg,
    IterConfig, MfgData, MfgSolution, Termination,
};
