use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The requested cutoff discards more probability than allowed.
    #[error("truncation discards {discarded:.3e} > {allowed:.3e}; need charge cutoff >= {required}")]
    Truncation { discarded: f64, allowed: f64, required: u32 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("tridiagonal eigensolver did not converge (dim {dim}, index {index})")]
    NoConvergence { dim: usize, index: usize },

    /// The overlap never drops below the threshold on the scanned grid.
    #[error("overlap stays above threshold on the whole time grid")]
    Unbounded,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
