use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("frame matrix is singular (reciprocal condition number {rcond:e})")]
    SingularFrame { rcond: f64 },

    #[error("integral diverges for n = {n}, mu = {mu} (requires |mu| < n)")]
    DivergentIntegral { n: u32, mu: f64 },

    #[error("tolerance not met: estimated error {achieved:e}, requested {requested:e}")]
    ToleranceNotMet { achieved: f64, requested: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("internal inconsistency: {0}")]
    InconsistencyFault(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("grid size N = {n} exceeds the dense limit {limit}")]
    GridTooLarge { n: usize, limit: usize },

    #[error("assembled operator is not symmetric (max deviation {asymmetry:e})")]
    AssemblyFault { asymmetry: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    /// Stable machine-readable code, used in CLI error documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::SingularFrame { .. } => "SingularFrame",
            Error::DivergentIntegral { .. } => "DivergentIntegral",
            Error::ToleranceNotMet { .. } => "ToleranceNotMet",
            Error::OutOfRange(_) => "OutOfRange",
            Error::ConditionViolated(_) => "ConditionViolated",
            Error::InconsistencyFault(_) => "InconsistencyFault",
            Error::FitFailed(_) => "FitFailed",
            Error::GridTooLarge { .. } => "GridTooLarge",
            Error::AssemblyFault { .. } => "AssemblyFault",
            Error::InvalidOperator(_) => "InvalidOperator",
            Error::Input(_) => "InputError",
        }
    }

    /// Numerical failures, as opposed to violated preconditions.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ToleranceNotMet { .. }
                | Error::InconsistencyFault(_)
                | Error::FitFailed(_)
                | Error::AssemblyFault { .. }
        )
    }
}
