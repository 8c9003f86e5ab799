use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is out of range or violates a model invariant.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested construction does not exist for this model family.
    #[error("model domain: {0}")]
    ModelDomain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive definite (minimum eigenvalue {0:.6e})")]
    Indefinite(f64),

    /// The operator is not diagonalizable with a real spectrum.
    #[error("no metric exists: {0}")]
    NoMetric(String),

    #[error("size cap exceeded: n = {n} > cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("simultaneous reduction failed after {attempts} attempts: {reason}")]
    ReductionFailed { attempts: usize, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
