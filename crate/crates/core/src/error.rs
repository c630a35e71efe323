use thiserror::Error;

use crate::grade::Grade;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Two values that must live in the same grade monoid do not.
    #[error("grade {grade} does not belong to monoid {monoid}")]
    ForeignGrade { grade: String, monoid: String },

    #[error("grade mismatch: expected {expected}, found {found}")]
    GradeMismatch { expected: Grade, found: Grade },

    #[error("coercion from {from} to {to} is not an order relation")]
    BadCoercion { from: Grade, to: Grade },

    #[error("unknown operation `{0}`")]
    UnknownOperation(String),

    #[error("operation `{op}` expects {expected} arguments, got {found}")]
    Arity { op: String, expected: usize, found: usize },

    #[error("arguments of `{op}` have unequal grades {left} and {right}")]
    UnequalChildGrades { op: String, left: Grade, right: Grade },

    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),

    #[error("duplicate operation `{0}`")]
    DuplicateOperation(String),

    #[error("ill-formed: {0}")]
    IllFormed(String),

    #[error("grade {0} is outside the model support")]
    Support(Grade),

    #[error("resource cap {cap} exceeded while {what}")]
    Resource { what: String, cap: usize },

    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("{0}")]
    Structural(String),
}

pub type Result<T> = std::result::Result<T, Error>;
