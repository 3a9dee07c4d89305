use thiserror::Error;

use crate::hermlin::Model;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("the zero vector has no projective point")]
    ZeroVector,
    #[error("non-finite input")]
    NonFinite,
    #[error("matrix does not preserve the {0:?} form")]
    NotFormPreserving(Model),
    #[error("points coincide projectively")]
    Coincident,
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("operands are expressed in different models")]
    MixedForms,
    #[error("expected {expected}, found {found}")]
    WrongClass { expected: String, found: String },
    #[error("ambiguous within tolerance: {first} or {second}")]
    Ambiguous { first: String, second: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("division by zero")]
    DivisionByZero,
}

pub type Result<T> = std::result::Result<T, GeomError>;

impl GeomError {
    pub(crate) fn ambiguous(first: impl Into<String>, second: impl Into<String>) -> Self {
        GeomError::Ambiguous {
            first: first.into(),
            second: second.into(),
        }
    }

    pub(crate) fn wrong_class(expected: impl Into<String>, found: impl Into<String>) -> Self {
        GeomError::WrongClass {
            expected: expected.into(),
            found: found.into(),
        }
    }
}
