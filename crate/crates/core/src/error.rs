use thiserror::Error;

use crate::Vector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("structure matrix is singular (|det K| = {det:e})")]
    Singular { det: f64 },

    #[error("transversality condition violated (normalized |det| = {det:e})")]
    Transversality { det: f64 },

    #[error("Newton iteration in {context} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("implicit step failed after {iterations} iterations (residual {residual:e})")]
    StepFailure {
        last_iterate: Vector,
        residual: f64,
        iterations: usize,
    },

    #[error("step {index} failed: {source}")]
    AtStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("reconstructed Birkhoffian fails the gradient check (residual {residual:e}); input is not self-adjoint")]
    Inconsistent { residual: f64 },

    #[error("order {0} is not supported by the recursive coefficient path (max 2)")]
    UnsupportedOrder(usize),

    #[error("operation requires an autonomous or semi-autonomous system")]
    Kind,

    #[error("exact solution implemented for the underdamped branch only (0 <= nu < 2, got {0})")]
    UnsupportedBranch(f64),
}
