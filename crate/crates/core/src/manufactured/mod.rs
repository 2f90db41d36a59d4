//! Manufactured solutions with hand-differentiated sources, and convergence studies
//! built on them. Nothing here uses the stencils under test to build an oracle.

mod catalog;
mod jet;
mod study;

pub use catalog::{catalog, make_case, EquationTag, Forcing, ManufacturedCase, SeparableField};
pub use jet::{CoefShape, Jet, SpaceFactor, TimeFactor};
pub use study::{
    convergence_study, default_ladders, fit_order, run_ladder, Axis, ConvergenceReport,
    LadderLevel, LadderReport, Order, ROUNDING_FLOOR,
};
pub(crate) use study::ols;
