use thiserror::Error;

/// Errors raised by the exact-enumeration toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice too large: n={n} has 2^{sites} states, ceiling is {ceiling}")]
    LatticeTooLarge { n: u32, sites: u32, ceiling: u64 },

    #[error("lattice size mismatch: {left} vs {right}")]
    SizeMismatch { left: u32, right: u32 },

    #[error("invalid lattice size {0}: n must be at least 1")]
    InvalidSize(u32),

    #[error("invalid temperature {0}: must be positive or infinite")]
    InvalidTemperature(f64),

    #[error("site ({p}, {q}) outside an n={n} lattice")]
    SiteOutOfRange { p: u32, q: u32, n: u32 },

    #[error("kappa must be at least 1, got {0}")]
    KappaBelowOne(f64),

    #[error("probability vector not normalized: sum = {0}")]
    NotNormalized(f64),

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("symmetrized kernel is not symmetric: residual {0:e}")]
    AsymmetricKernel(f64),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
