use thiserror::Error;

/// Errors surfaced by the library layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("energy drift {drift:.3e} exceeds tolerance {tol:.3e} during flow integration")]
    EnergyDrift { drift: f64, tol: f64 },

    #[error("eigensolver did not converge: {0}")]
    EigenFailure(String),

    #[error("quadrature refinement did not converge (last two values {0} and {1})")]
    RefinementFailure(f64, f64),

    #[error("scaling fit needs at least 3 usable radii, got {0}")]
    TooFewRadii(usize),

    #[error("cache error: {0}")]
    Cache(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
