use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes, specs or counts of the operands do not fit together.
    #[error("input error: {0}")]
    Input(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// `R(K)` is not contained in `R(U)`, so no coefficient operator exists.
    #[error("not an atomic system: range inclusion fails (residual {residual:.3e})")]
    NotAtomic { residual: f64 },

    #[error("frame operator not invertible (smallest eigenvalue {min_eig:.3e})")]
    SingularFrameOperator { min_eig: f64 },

    /// A hypothesis of an audited statement failed; the string names it.
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
