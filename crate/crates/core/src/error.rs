use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("form mismatch: expected {expected}, got {got}")]
    FormMismatch { expected: String, got: String },

    #[error("field length {got} does not match mesh count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("operator requires an orthogonal mesh")]
    NonOrthogonal,

    #[error("W operator constraint residual {residual:.3e} exceeds {tolerance:.1e}")]
    WConstraint { residual: f64, tolerance: f64 },

    #[error("alpha least-squares residual {residual:.3e} in cell {cell} exceeds {tolerance:.1e}")]
    AlphaResidual {
        cell: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("alpha coefficients do not belong to this mesh: {0}")]
    MeshMismatch(String),

    #[error("non-positive {what} at index {index}: {value:e}")]
    Positivity {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("incompatible right-hand side: {0}")]
    Incompatible(String),

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
