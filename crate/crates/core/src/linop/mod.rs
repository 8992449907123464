//! Linearized operators: the planar limit operator with its kernel, and the
//! discretized operator around the ansatz with its inverse-norm probe.

mod limit;
mod system;

pub use limit::{
    admissible_modes, kernel_functions, limit_potential, quadrature_identities, restrict_to_modes,
    KernelFunctions, LimitOperator,
};
pub use system::{assemble_linearized, DiscreteLinearizedSystem, InverseNormEstimate};
