use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the deterministic and Monte Carlo routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("argument {x} lies within {guard:e} of the pole at {pole}")]
    Pole { x: f64, pole: f64, guard: f64 },

    #[error("solver did not converge at z = {z}: last iterate {last}, residual {residual:e}")]
    NoConvergence {
        z: Complex64,
        last: Complex64,
        residual: f64,
    },

    #[error("quadrature did not converge (achieved tolerance {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error("counting formula gives {counted} eigenvalues in component {component}, quantile integral gives {integral}")]
    CountMismatch {
        component: usize,
        counted: f64,
        integral: f64,
    },

    #[error("edge {edge} is degenerate: {reason}")]
    DegenerateEdge { edge: usize, reason: String },

    #[error("singular equivalent: |1 + m sigma_{index}| = {value:e} is below the guard")]
    SingularEquivalent { index: usize, value: f64 },

    #[error("empty spectral domain: {0}")]
    EmptyDomain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible moment sequence: {0}")]
    Moments(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("component {component} has {available} eigenvalues, {requested} requested")]
    ComponentTooSmall {
        component: usize,
        available: usize,
        requested: usize,
    },

    #[error("empty sample")]
    EmptySample,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
