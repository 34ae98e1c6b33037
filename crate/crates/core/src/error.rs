use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("arity {0} is odd, an even arity is required")]
    OddArity(usize),
    #[error("arity {n} exceeds the explicit table cap {cap}")]
    ArityAboveCap { n: usize, cap: usize },
    #[error("h family has arity {found}, instance needs {expected}")]
    FamilyArity { expected: usize, found: usize },
    #[error("function is not bent")]
    NotBent,
    #[error("query budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
