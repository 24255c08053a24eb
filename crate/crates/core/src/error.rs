use crate::cat::Kind;

/// Errors raised by engine operations. Property failures are not errors;
/// they are reported through verdict values.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("cannot compose: codomain {left} is not the domain {right}")]
    CompositionMismatch { left: String, right: String },

    #[error("kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: Kind, found: Kind },

    #[error("invalid object: {0}")]
    InvalidObject(String),

    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    #[error("boundary mismatch: {0}")]
    Boundary(String),

    #[error("not a span: {0}")]
    NotASpan(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("invalid footprint: {0}")]
    InvalidFootprint(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("ill-formed expression: {0}")]
    IllFormed(String),

    #[error("search too large: about {estimate} candidates exceeds the cap of {cap}")]
    TooLarge { estimate: u128, cap: u128 },

    #[error("not a match: {0}")]
    NotAMatch(String),

    #[error("malformed rule pattern: {0}")]
    MalformedPattern(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
