use std::io;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("field lives on a different mesh ({0})")]
    MeshMismatch(String),

    #[error("linear solver did not converge for {system}: {iterations} iterations, relative residual {residual:.3e}")]
    SolverFailure {
        system: String,
        iterations: usize,
        residual: f64,
    },

    #[error("reaction integrator step size underflow at node {node} (t = {time})")]
    StepUnderflow { node: usize, time: f64 },

    #[error("point ({x}, {y}) lies outside the source triangulation")]
    PointLocation { x: f64, y: f64 },

    #[error("{context} at adjoint level {level}: {source}")]
    AtLevel {
        context: &'static str,
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("evaluation failed at delta1 = {delta1}: {source}")]
    Evaluation {
        delta1: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SolverFailure { .. } | Error::StepUnderflow { .. } | Error::PointLocation { .. } => true,
            Error::AtLevel { source, .. } | Error::Evaluation { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
