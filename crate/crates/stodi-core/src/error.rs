use std::path::PathBuf;

/// Errors produced by trajectory construction, file I/O, metric evaluation
/// and the optimizers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid trajectory size: {0}")]
    InvalidSize(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no inverse kinematics solution: best residual {residual:.3e} m")]
    NoIkSolution { residual: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
