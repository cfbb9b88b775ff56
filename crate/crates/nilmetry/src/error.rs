//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, loading, and estimator entry points.
///
/// Hot-path group operations (`bch_product`, `bracket`, `dilation`) panic on
/// dimension mismatches instead, matching the convention of the linear
/// algebra crates this library builds on.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown builtin `{0}` (try `abelian(n)`, `filiform3`, `heisenberg3`, `quaternion_heisenberg`)")]
    UnknownBuiltin(String),

    #[error("nilpotency step {0} exceeds the supported maximum of 4")]
    StepTooLarge(usize),

    #[error("invalid algebra definition: {0}")]
    InvalidAlgebraFile(String),

    #[error("algebra axioms violated:\n{0}")]
    InvalidAlgebra(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("declared large-scale Lipschitz constants (L={l}, A={a}) violated on audit: |g(x)-g(y)| = {observed} at |x-y| = {separation}")]
    DeclaredConstantsViolated {
        l: f64,
        a: f64,
        observed: f64,
        separation: f64,
    },

    #[error("map has no derivable inverse: {0}")]
    NoInverse(String),

    #[error("optimization budget must be positive")]
    ZeroBudget,

    #[error("horizontal correction failed: layer {layer} residual {residual:.3e} not representable by brackets of lower layers")]
    CarnotCorrectionFailed { layer: usize, residual: f64 },

    #[error("gradient field is not integrable: axis-parallel path integrals differ by {disagreement:.3e} (tolerance {tolerance:.3e}); det(Df) is likely not constant")]
    NotIntegrable { disagreement: f64, tolerance: f64 },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("all sampled pairs were at zero distance; cannot fit an envelope")]
    AllPairsDegenerate,

    #[error("map expression parse error: {0}")]
    MapExpr(String),

    #[error("report parse error: {0}")]
    ReportParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
