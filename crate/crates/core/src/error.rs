use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcError {
    #[error("non-finite field")]
    NonFiniteField,
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("kernel singularity")]
    KernelSingularity,
    #[error("exponent out of admissible range")]
    ExponentOutOfRange,
    #[error("insufficient padding")]
    InsufficientPadding,
    #[error("series divergence: k too large for grid")]
    SeriesDivergence,
    #[error("singular point")]
    SingularPoint,
    #[error("not a diffeomorphism")]
    NotDiffeomorphism,
    #[error("degenerate exponent")]
    DegenerateExponent,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("family parameters too large")]
    FamilyTooLarge,
    #[error("not a homeomorphism trace")]
    NotHomeomorphismTrace,
    #[error("field is not harmonic (relative Laplacian residual {0:.3e})")]
    NotHarmonic(f64),
}

pub type Result<T> = std::result::Result<T, QcError>;
