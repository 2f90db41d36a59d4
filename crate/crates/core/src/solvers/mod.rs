//! Implicit Euler solvers for the two scalar degenerate parabolic equations and
//! the discrete similarity between the nondivergence and divergence operators.

mod fp;
mod hjb;
mod isomorphism;
mod tridiag;

pub use fp::{apply_fp_operator, fp_scheme_residual, solve_fp_linear, FpLinearProblem};
pub use hjb::{apply_hjb_operator, hjb_scheme_residual, solve_hjb_linear, HjbLinearProblem};
pub use isomorphism::isomorphism_residual;
pub use tridiag::Tridiagonal;

use crate::domain::SpaceTimeField;
use crate::error::Result;

pub(crate) fn column_or_zero(f: Option<&SpaceTimeField>, k: usize, n: usize) -> Vec<f64> {
    match f {
        Some(f) => f.slice(k),
        None => vec![0.0; n],
    }
}

pub(crate) fn check_optional(
    base: &SpaceTimeField,
    extra: Option<&SpaceTimeField>,
) -> Result<()> {
    match extra {
        Some(e) => base.check_same_grid(e),
        None => Ok(()),
    }
}

/// Max over nodes of `|f| / a^power`, with the attaining `(i, k)`.
pub(crate) fn max_ratio(f: &SpaceTimeField, a: &[f64], power: f64) -> (f64, (usize, usize)) {
    let mut best = (0.0, (0, 0));
    for ((i, k), v) in f.values().indexed_iter() {
        let r = v.abs() / a[i].powf(power);
        if r > best.0 {
            best = (r, (i, k));
        }
    }
    best
}
