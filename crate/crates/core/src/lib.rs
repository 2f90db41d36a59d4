//! Numerical laboratory for the one-dimensional mean-field game system with a
//! diffusion coefficient that degenerates at the boundary.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]


pub mod carleman;
pub mod cli;
pub mod domain;
pub mod error;
pub mod manufactured;
pub mod mfg;
pub mod solvers;
pub mod stability;

pub use error::{Error, Result};
