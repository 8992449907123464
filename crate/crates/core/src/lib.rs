//! Bubbling solutions of Neumann Toda systems on k-symmetric model surfaces:
//! Cartan data, projected-bubble ansatz, linearized operator and a
//! contraction-mapping solve, with the diagnostics used to verify them.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod ansatz;
pub mod bubbles;
pub mod cartan;
pub mod error;
pub mod geometry;
pub mod linop;
pub mod nonlinear;
pub mod numerics;

pub use error::{Error, Result};
