use thiserror::Error;

use crate::algebra::Kind;
use crate::poly::VarId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected a {expected} algebra, found {found}")]
    KindMismatch { expected: Kind, found: Kind },

    #[error("action side mismatch: {0}")]
    SideMismatch(&'static str),

    #[error("duplicate basis name `{0}`")]
    DuplicateName(String),

    #[error("polynomial uses variable {var} where only {allowed} is allowed")]
    VariableLeak { var: VarId, allowed: &'static str },

    #[error("map is not invertible over the polynomial ring (determinant {0})")]
    NotInvertible(String),

    #[error("subalgebra check failed: {0}")]
    NotSubalgebra(String),

    #[error("{count} unknowns exceed the search cap of {cap}")]
    CapExceeded { count: usize, cap: usize },

    #[error("constraint system is unsatisfiable: {0} = 0")]
    Unsatisfiable(String),

    #[error("assignment is missing unknown {0}")]
    MissingUnknown(VarId),

    #[error("map does not fit the ansatz: {0}")]
    OutsideAnsatz(String),

    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("malformed constraint system document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
