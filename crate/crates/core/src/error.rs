use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not reach tolerance: estimate {estimate:.3e} > {tolerance:.3e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("grid does not resolve scale {scale:.3e}: {nodes} nodes inside, need {required}")]
    Unresolved {
        scale: f64,
        nodes: usize,
        required: usize,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error(
        "fixed-point iteration diverged at iteration {iteration}: contraction ratios {ratios:?}"
    )]
    Divergence { iteration: usize, ratios: Vec<f64> },

    #[error("iterate left the admissible ball: norm {norm:.3e} > radius {radius:.3e}")]
    BallViolation { norm: f64, radius: f64 },

    #[error("correction exceeded overflow cap: max |phi| = {max:.3e} > {cap}")]
    Overflow { max: f64, cap: f64 },

    #[error("no convergence after {iterations} iterations (last step {last_step:.3e})")]
    NoConvergence { iterations: usize, last_step: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
