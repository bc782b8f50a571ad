//! Error type shared across the solver.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate direction: point ({x1}, {z}) coincides with source at alpha = {alpha}")]
    DegenerateDirection { x1: f64, z: f64, alpha: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("forward solver did not converge in {iterations} iterations (last update {residual:.3e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("direct solve needs {unknowns} unknowns, cap is {cap}")]
    TooManyUnknowns { unknowns: usize, cap: usize },

    #[error("collocation matrix is singular")]
    SingularMatrix,

    #[error("nonpositive boundary sample {value} at {node}")]
    NonPositiveData { node: String, value: f64 },

    #[error("line search stagnated at iteration {iteration}: J = {value:.6e}, |grad| = {grad_norm:.3e}, step = {step:.3e}")]
    Stagnation {
        iteration: usize,
        value: f64,
        grad_norm: f64,
        step: f64,
    },

    #[error("boundary data mismatch: {0}")]
    BoundaryMismatch(String),

    #[error("no sample has a positive Carleman denominator at lambda = {lambda}")]
    DegenerateSamples { lambda: f64 },

    #[error("grid metadata mismatch: {0}")]
    GridMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IterationLimit { .. }
                | Error::SingularMatrix
                | Error::NonPositiveData { .. }
                | Error::Stagnation { .. }
                | Error::DegenerateSamples { .. }
                | Error::DegenerateDirection { .. }
        )
    }
}
