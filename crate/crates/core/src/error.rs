use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shift {shift:?} is not an integer multiple of the cell size {h:?}")]
    UnalignedShift { shift: Vec<f64>, h: Vec<f64> },

    #[error("grid functions live on different grids or supports")]
    GridMismatch,

    #[error("weight sample {value} at {point:?} is below half of the certified lower bound {inf_bound}")]
    CorruptedWeight {
        value: f64,
        point: Vec<f64>,
        inf_bound: f64,
    },

    #[error("test function is not supported strictly inside the domain (cell {0} violates it)")]
    SupportViolation(usize),

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
