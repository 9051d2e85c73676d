use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("design matrix is rank deficient (smallest Gram eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e})")]
    RankDeficient {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),

    #[error("large-sample approximation needs N >= 2, got N = {n}")]
    ApproximationInvalid { n: usize },

    #[error("error-norm bound must be positive, got {0}")]
    NonPositiveBound(f64),

    #[error("scalar bounds need a single coefficient, model has m = {m}")]
    NotUnivariate { m: usize },

    #[error("residual norm is zero: the model interpolates the data and the evidence diverges")]
    PerfectFit,

    #[error("sigma must be positive and finite, got {0}")]
    NonPositiveSigma(f64),

    #[error("model set is empty")]
    EmptyModelSet,

    #[error("invalid model priors: {0}")]
    InvalidPriors(String),

    #[error("expected {expected} sigma mode")]
    SigmaModeMismatch { expected: &'static str },

    #[error("unknown-sigma evidence is only defined for the approximate bound")]
    ExactBoundUnsupported,

    #[error("quadrature oracle supports m <= {max}, got m = {m}")]
    DimensionTooLarge { m: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
