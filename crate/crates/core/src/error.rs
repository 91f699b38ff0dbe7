use thiserror::Error;

/// Errors raised by the library. Mathematical check failures are not errors;
/// they are reported through verdicts and evidence records.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "matrix is not Hermitian: max |m_ij - conj(m_ji)| = {max_asymmetry:e} exceeds {allowed:e}"
    )]
    NonHermitianInput { max_asymmetry: f64, allowed: f64 },
    #[error("matrix must be square with dimension >= 1 (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigen-solver failed to converge")]
    SolverError,
    #[error("point or map belongs to a different space: {0}")]
    SpaceMismatch(String),
    #[error("operation requires a {expected} space")]
    WrongSpaceKind { expected: &'static str },
    #[error("requested {requested} distinct points but the group has only {available} elements")]
    TooManyPoints { requested: usize, available: usize },
    #[error("could not sample {requested} separated points after {attempts} attempts")]
    ExhaustedSampling { requested: usize, attempts: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("points at indices {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("map is not injective: images of points {0} and {1} coincide")]
    InjectivityViolation(usize, usize),
    #[error("map is periodic on the given points: {0}")]
    PeriodicityDetected(String),
    #[error("map has no adjoint partner")]
    MissingAdjoint,
    #[error("projection vector must be nonzero")]
    ZeroVector,
    #[error("origin is not fixed by the map")]
    OriginNotFixed,
    #[error("bad dimensions for embedding: source {source_dim}, target {target}")]
    BadDimensions { source_dim: usize, target: usize },
    #[error("degeneracy witness failed: form value {value:e} exceeds {allowed:e}")]
    WitnessFailed { value: f64, allowed: f64 },
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("problem too large for dense verification: {size} > {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("configuration error in `{field}`: {message}")]
    ConfigError { field: String, message: String },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
