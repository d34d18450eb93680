use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("non-finite float component")]
    NonFinite,

    #[error("ambient mismatch: {0:?} vs {1:?}")]
    AmbientMismatch(Vec<String>, Vec<String>),

    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree overflow: a {degree}-form exceeds ambient dimension {ambient}")]
    DegreeOverflow { degree: usize, ambient: usize },

    #[error("expected a form of degree {expected}, got degree {got}")]
    WrongDegree { expected: usize, got: usize },

    #[error("frame has generic rank {got}, expected {expected}")]
    WrongRank { expected: usize, got: usize },

    #[error("vector not tangent to the distribution: {0}")]
    NotInDistribution(String),

    #[error("characteristic line field: {0}")]
    CharacteristicField(String),

    #[error("1-form alpha is not a contact form: alpha ∧ dalpha vanishes")]
    NonContact,

    #[error("shear monomial involves the sheared coordinate `{0}`")]
    ShearTargetInMonomial(String),

    #[error("constant polynomial where a nonconstant one is required")]
    ConstantInput,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("verification failure: {0}")]
    Verification(String),

    #[error("parse error: {0}")]
    Parse(String),
}
