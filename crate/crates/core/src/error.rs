//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure is not absolutely continuous with bounded density: {0}")]
    NotFlat(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid evaluation at {x} outside domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{what} did not converge after {iters} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: String,
        iters: usize,
        residual: f64,
    },

    #[error("subcritical operation on supercritical input: z = {z} >= 1/b = {z_c}")]
    Supercritical { z: f64, z_c: f64 },

    #[error("operation requires a critical measure: z = {z}, |z - 1/b| = {offset:.3e} > {tol:.3e}")]
    NotCritical { z: f64, offset: f64, tol: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
