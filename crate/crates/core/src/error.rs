use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("brute-force oracle refused: {size} diagram points exceed the limit of {limit}")]
    OracleTooLarge { size: usize, limit: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("kernel matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e}); use ksvm_train or a spectral transform")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("prediction error: {0}")]
    Prediction(String),

    #[error("bandwidth selection failed: {0}")]
    Selection(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
