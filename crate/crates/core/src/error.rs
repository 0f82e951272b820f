use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("spectral gap closed: min |eigenvalue| = {gap:.3e} < tolerance {tol:.1e}")]
    GapClosed { gap: f64, tol: f64 },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("invalid real structure: {0}")]
    InvalidStructure(String),
    #[error("Clifford signature ({r},{s}) exceeds the supported size")]
    SizeExceeded { r: usize, s: usize },
    #[error("volume element requires r = 0, got r = {r}")]
    PositiveGeneratorsPresent { r: usize },
    #[error("graded tensor product needs grading operators on both factors")]
    MissingGrading,
    #[error("relation `{relation}` fails with residual {residual:.3e}")]
    RelationFailure { relation: String, residual: f64 },
    #[error("not an IQPV: relation `{relation}` fails with residual {residual:.3e}")]
    NotIqpv { relation: String, residual: f64 },
    #[error("corner isomorphism needs a reference IQPV and r + s >= 1")]
    NoReference,
    #[error("internal dimension {n} not divisible by {block} required by class {class}")]
    DimensionNotDivisible { n: usize, block: usize, class: String },
    #[error("invalid class: {0}")]
    InvalidClass(String),
    #[error("inconsistent operator square: {0}")]
    InconsistentSquares(String),
    #[error("operators do not anti-commute (residual {residual:.3e})")]
    NotAntiCommuting { residual: f64 },
    #[error("no chiral operator available: {0}")]
    NotChiral(String),
    #[error("matrix at real momentum is not skew in the Majorana basis (residual {residual:.3e})")]
    NotSkew { residual: f64 },
    #[error("slab of {l} sites is thinner than 8 decay lengths (xi = {xi:.3})")]
    SlabTooThin { l: usize, xi: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
