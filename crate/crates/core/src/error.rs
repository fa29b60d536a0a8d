use thiserror::Error;

/// Errors raised by input validation and file handling.
///
/// Construction failures of the cycle builder are not errors in this sense;
/// they are reported as [`crate::hamiltonian::ConstructionFailure`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lp exponent {0}: p must be >= 1 or `inf`")]
    InvalidExponent(String),

    #[error("invalid instance configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid radius {0}")]
    InvalidRadius(f64),

    #[error("invalid tessellation parameters: {0}")]
    InvalidTessellation(String),

    #[error("no cell lies at distance >= r from the boundary (r = {r}, k = {k})")]
    NoInteriorCell { r: f64, k: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
