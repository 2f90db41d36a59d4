//! Grids, degenerate diffusion coefficients, space-time fields, finite-difference
//! stencils and the weighted norms that the estimates are phrased in.

mod coefficient;
mod field;
mod grid;
mod norms;
pub mod stencil;

pub use coefficient::DegenerateCoefficient;
pub use field::SpaceTimeField;
pub use grid::{build_grid, SpaceTimeGrid};
pub use norms::{weighted_norm, weighted_norm_sq, NormKind};
pub use stencil::{spatial_derivatives, spatial_derivatives_with, time_derivative, Closure};
