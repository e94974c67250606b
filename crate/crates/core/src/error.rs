use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigen-solver did not converge for matrix {hash}")]
    NoConvergence { hash: String },

    #[error("no real eigenvalue attains the spectral radius of matrix {hash}")]
    ComplexLeading { hash: String },

    #[error("adjoint and leading eigenvectors of matrix {hash} are orthogonal")]
    DegeneratePairing { hash: String },

    #[error("linear program stalled after {pivots} pivots")]
    LpStall { pivots: usize },

    #[error("linear program is {0}")]
    LpStatus(String),

    #[error("candidate search found no usable product: {0}")]
    NoCandidate(String),

    #[error("balancing failed: {0}")]
    Balancing(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
