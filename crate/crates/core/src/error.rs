use thiserror::Error;

/// Errors raised by constructors and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("outcome {index} has zero trace; drop it before use")]
    ZeroTraceOutcome { index: usize },

    #[error("measurement is not informationally complete (condition number {condition:.3e})")]
    NotInformationallyComplete { condition: f64 },

    #[error("measurement is not minimal: {outcomes} outcomes in dimension {dim}")]
    NotMinimal { outcomes: usize, dim: usize },

    #[error("outcome {index} has probability {probability:.3e} below the cutoff")]
    VanishingProbability { index: usize, probability: f64 },

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },

    #[error("fiducial orbit is not equiangular (worst overlap deviation {worst:.3e})")]
    FiducialNotSic { worst: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no well-conditioned measurement after {attempts} attempts")]
    RetryBudgetExhausted { attempts: usize },

    #[error("operator basis is rank deficient (Gram condition number {condition:.3e})")]
    RankDeficientBasis { condition: f64 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
