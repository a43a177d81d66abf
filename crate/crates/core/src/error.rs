use thiserror::Error;

/// Errors raised by estimation, tuning and evaluation routines.
#[derive(Debug, Error)]
pub enum CscsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("column {0} has zero variance and cannot be scaled")]
    ZeroVarianceColumn(usize),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("invalid row problem: {0}")]
    InvalidProblem(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("training part of fold {fold} has zero variance in variable {variable}")]
    FoldDegenerate { fold: usize, variable: usize },

    #[error("degenerate model configuration: {0}")]
    DegenerateConfig(String),

    #[error("true edge set is empty, TPR is undefined")]
    EmptyTruth,

    #[error("ROC curve needs at least two points")]
    InsufficientCurve,

    #[error("conditioning block of the covariance is singular")]
    SingularBlock,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CscsError>;
