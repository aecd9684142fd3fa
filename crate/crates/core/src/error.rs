use thiserror::Error;

/// Errors raised by the geometry engine.
///
/// Variants are grouped by how a caller should react: bad input data,
/// a curvature formula whose hypotheses are not met, or a failed
/// consistency check on otherwise well-formed data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector where a nonzero vector is required ({0})")]
    ZeroVector(&'static str),

    #[error("subspace is not invariant under ad(u): residual {residual:?}")]
    NotInvariant { residual: f64 },

    #[error("index sets do not partition the basis: {0}")]
    InvalidPartition(String),

    #[error("[{kind}] closure fails at ({x}, {y}): residual {residual:?}")]
    ClosureFailure {
        kind: &'static str,
        x: usize,
        y: usize,
        residual: f64,
    },

    #[error("abelian ideal verification failed: {0}")]
    InconsistentIdeal(String),

    #[error("inadmissible norm: {0}")]
    InadmissibleNorm(String),

    #[error("fundamental tensor is not positive-definite (min eigenvalue {min_eigenvalue:?})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("commutator residual {residual:?}: [u,v] != 0")]
    NotCommuting { residual: f64 },

    #[error("anchor condition residual {residual:?}: <[u,m],u>_u != 0")]
    AnchorCondition { residual: f64 },

    #[error("vectors are linearly dependent: relative Gram determinant {relative_det:?}")]
    LinearlyDependent { relative_det: f64 },

    #[error("operation requires a riemannian norm, got {0}")]
    NotRiemannian(&'static str),

    #[error("no applicable flags among {total} candidates")]
    NoApplicableFlags { total: usize },

    #[error("vector is not in {space}: residual {residual:?}")]
    NotInSubspace { space: &'static str, residual: f64 },

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("invalid space definition: {}", .0.join("; "))]
    InvalidSpace(Vec<String>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True when the error means a formula's hypotheses are unmet, as
    /// opposed to malformed input.
    pub fn is_inapplicable(&self) -> bool {
        matches!(
            self,
            Error::NotCommuting { .. }
                | Error::AnchorCondition { .. }
                | Error::LinearlyDependent { .. }
                | Error::NoApplicableFlags { .. }
                | Error::Hypothesis(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
