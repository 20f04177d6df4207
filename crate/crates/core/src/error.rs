//! Error type shared by all solver modules.

use std::fmt;

/// Everything that can go wrong in a solver call.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// A coupling product `b_k * c_k <= 0` breaks the Sturm-sequence guarantees.
    SturmConditionViolated { index: usize, product: f64 },
    /// An off-diagonal block is singular or too ill-conditioned to invert.
    SingularOffDiagonal { index: usize, cond: f64 },
    /// An iteration cap was hit before reaching the requested tolerance.
    ConvergenceFailure(String),
    /// A continued-fraction step was asked to divide by a zero corner.
    PoleEncountered { index: i64 },
    /// The operation is only defined for other spin values (e.g. r = 1/2, integer l).
    UnsupportedSpin(String),
    /// Matrix/vector sizes do not match.
    DimensionMismatch { expected: usize, actual: usize },
    /// Input matrix is not symmetric within tolerance.
    NotSymmetric { max_asymmetry: f64 },
    /// A parameter is out of its documented domain.
    InvalidParameter(String),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::SturmConditionViolated { index, product } => write!(
                f,
                "Sturm condition violated: b[{index}]*c[{index}] = {product:e} is not positive"
            ),
            SolverError::SingularOffDiagonal { index, cond } => write!(
                f,
                "off-diagonal block {index} is singular or ill-conditioned (cond ~ {cond:e})"
            ),
            SolverError::ConvergenceFailure(what) => write!(f, "convergence failure: {what}"),
            SolverError::PoleEncountered { index } => {
                write!(f, "continued-fraction pole at step {index} (zero corner)")
            }
            SolverError::UnsupportedSpin(what) => write!(f, "unsupported spin: {what}"),
            SolverError::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            SolverError::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix not symmetric (max |a - a^T| = {max_asymmetry:e})")
            }
            SolverError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl std::error::Error for SolverError {}

pub type Result<T> = std::result::Result<T, SolverError>;
