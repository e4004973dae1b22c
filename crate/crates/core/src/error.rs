use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot add surds with distinct radicand classes ({0} vs {1})")]
    IncompatibleSurd(String, String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("point is the pole of the Cayley transform")]
    Pole,

    #[error("base point is degenerate: block {0} vanishes")]
    DegenerateBasePoint(usize),

    #[error("vector is not a CR tangent vector (|theta(X)| = {0:e})")]
    NotTangent(f64),

    #[error("map does not send the base point to the target boundary (residual {0:e})")]
    NotBoundaryPreserving(f64),

    #[error("source and target block structures differ: {0}")]
    StructureMismatch(String),

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("invalid automorphism: {0}")]
    InvalidAutomorphism(String),

    #[error("parse error: {0}")]
    Parse(String),
}
