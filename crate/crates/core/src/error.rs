use thiserror::Error;

/// Errors produced by state validation and the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |rho_ij - conj(rho_ji)| = {0:e})")]
    NotHermitian(f64),

    #[error("trace is not one (|Tr rho - 1| = {0:e})")]
    TraceNotOne(f64),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPSD(f64),

    #[error("state vector is not normalized (|norm^2 - 1| = {0:e})")]
    NotNormalized(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("Bloch vector lies outside the unit ball (|n| = {0})")]
    BlochOutOfBall(f64),

    #[error("operation requires a qubit, got dimension {0}")]
    DimensionNot2(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix columns are not orthonormal (max |W^dag W - I| = {0:e})")]
    NotIsometry(f64),

    #[error("isometry has {found} columns but the state has rank {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("Kraus set is not trace preserving (max |sum K^dag K - I| = {0:e})")]
    NotTracePreserving(f64),

    #[error("index sets do not partition the basis: {0}")]
    NotAPartition(String),

    #[error("measure {measure} has no exact evaluation in dimension {dim}")]
    NonExactMeasure { measure: String, dim: usize },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("extraction rate {0} outside (0, 1]")]
    RateOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
