use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A single reason a list of effects fails to form a POVM.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotHermitian { index: usize, residual: f64 },
    NotPositive { index: usize, min_eigenvalue: f64 },
    ExceedsIdentity { index: usize, max_eigenvalue: f64 },
    SumNotIdentity { residual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian { index, residual } => {
                write!(
                    f,
                    "NotEffect({index}): not Hermitian, |A - A^dag|_F = {residual:.3e}"
                )
            }
            Violation::NotPositive {
                index,
                min_eigenvalue,
            } => {
                write!(
                    f,
                    "NotEffect({index}): negative eigenvalue {min_eigenvalue:.3e}"
                )
            }
            Violation::ExceedsIdentity {
                index,
                max_eigenvalue,
            } => {
                write!(
                    f,
                    "NotEffect({index}): eigenvalue {max_eigenvalue:.6} exceeds 1"
                )
            }
            Violation::SumNotIdentity { residual } => {
                write!(f, "SumNotIdentity: |sum - I|_F = {residual:.3e}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (|M - M^dag|_F = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: String, found: String },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix must have at least one row and column")]
    EmptyMatrix,

    #[error("effect list is empty")]
    EmptyList,

    #[error("not an effect: {reason}")]
    NotEffect { reason: String },

    #[error("invalid POVM: {}", join_violations(.0))]
    InvalidPovm(Vec<Violation>),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("bad partition: {0}")]
    BadPartition(String),

    #[error("bad cell: {0}")]
    BadCell(String),

    #[error("a measurement tree needs at least two outcomes, got {0}")]
    TooFewOutcomes(usize),

    #[error("qubit factorization requires a two-dimensional system, got dimension {0}")]
    DimNotTwo(usize),

    #[error("invalid Bloch parameters alpha={alpha}, a={a}: {reason}")]
    NotEffectParams { alpha: f64, a: f64, reason: String },

    #[error("omega = {0} is outside (0, pi/4]")]
    OmegaOutOfRange(f64),

    #[error("invalid coupling circuit: {0}")]
    InvalidCircuit(String),

    #[error("malformed document: {0}")]
    Parse(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn dims(expected: impl fmt::Display, found: impl fmt::Display) -> Self {
        Error::DimMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Parse/IO-style failures as opposed to domain violations.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
