use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("level matrix has an odd diagonal entry at position {0}")]
    NotEven(usize),
    #[error("level matrix has a zero entry at ({0}, {1})")]
    ZeroEntry(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("multi-index entry ({0}, {1}) would become negative")]
    NegativeEntry(usize, usize),
    #[error("binomial lower index exceeds upper index at ({0}, {1})")]
    InvalidBinom(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("period matrix too close to the boundary: lambda_min(Im Omega) = {0:e}")]
    NearBoundary(f64),
    #[error("truncation radius {radius} gives tail bound {bound:e} > tolerance {tol:e}")]
    TruncationInsufficient { radius: u32, bound: f64, tol: f64 },
    #[error("no radius up to {cap} certifies tail tolerance {tol:e}")]
    Unachievable { cap: u32, tol: f64 },
    #[error("operator index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("sample matrix ill-conditioned: condition number {0:e}")]
    IllConditioned(f64),
    #[error("holdout residual {residual:e} exceeds fit tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("level sum leaves the admissible set: {0}")]
    LevelSumInvalid(String),
}

impl Error {
    /// Variant name, stable across message wording.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSymmetric => "NotSymmetric",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::NotEven(_) => "NotEven",
            Error::ZeroEntry(..) => "ZeroEntry",
            Error::Singular => "Singular",
            Error::NegativeEntry(..) => "NegativeEntry",
            Error::InvalidBinom(..) => "InvalidBinom",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::Malformed(_) => "Malformed",
            Error::NearBoundary(_) => "NearBoundary",
            Error::TruncationInsufficient { .. } => "TruncationInsufficient",
            Error::Unachievable { .. } => "Unachievable",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::IllConditioned(_) => "IllConditioned",
            Error::ResidualTooLarge { .. } => "ResidualTooLarge",
            Error::LevelSumInvalid(_) => "LevelSumInvalid",
        }
    }
}
