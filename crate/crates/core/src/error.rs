use thiserror::Error;

/// Errors produced by the simulation and reconstruction routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid phantom: {0}")]
    InvalidPhantom(String),

    #[error("pressure evaluated inside ball (distance {distance} <= radius {radius})")]
    InsideBall { distance: f64, radius: f64 },

    #[error("quadrature did not converge: estimated error {achieved:e} > tolerance {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("data does not vanish at t = 0 (max |value| = {max_abs:e})")]
    NonzeroInitial { max_abs: f64 },

    #[error("point not covered by any gnomonic chart: {0:?}")]
    Uncovered([f64; 3]),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
