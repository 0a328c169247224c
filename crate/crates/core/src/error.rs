use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at point {point}")]
    PoleAtPoint { point: String },
    #[error("gauge matrix is singular")]
    SingularGauge,
    #[error("exterior power {r} exceeds dimension {dim}")]
    InvalidArity { r: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("subspace is not stable under the connection")]
    NotStable,
    #[error("matrix does not span a stable line in End")]
    NotSemiInvariant,
    #[error("eigenvalues do not lie in the rational functions: {0}")]
    NotSplit(String),
    #[error("eigenvalues are repeated or eigenvectors defective")]
    DefectiveEigenstructure,
    #[error("system is not in the span of the supplied Lie basis")]
    NotReduced,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "division_by_zero",
            Error::PoleAtPoint { .. } => "pole_at_point",
            Error::SingularGauge => "singular_gauge",
            Error::InvalidArity { .. } => "invalid_arity",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Parse(_) => "parse_error",
            Error::NotStable => "not_stable",
            Error::NotSemiInvariant => "not_semi_invariant",
            Error::NotSplit(_) => "not_split",
            Error::DefectiveEigenstructure => "defective_eigenstructure",
            Error::NotReduced => "not_reduced",
            Error::InvalidInput(_) => "invalid_input",
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
