use thiserror::Error;

use crate::index::MultiIndex;

/// Errors surfaced by series construction, coefficient extraction,
/// certification and evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("reciprocal requires a constant term provably nonzero")]
    NonUnitReciprocal,
    #[error("translation point outside the certified domain")]
    TranslationOutsideDomain,
    #[error("substitution polynomial does not vanish at the origin")]
    NonvanishingSubstitution,
    #[error("y0 is not a simple root of P(0, Y)")]
    NotSimpleRoot,
    #[error("P(0, y0) != 0: inconsistent algebraic definition")]
    InconsistentDefinition,
    #[error("polynomial in Y is not squarefree")]
    NotSquarefree,
    #[error("the zero polynomial has no root structure")]
    ZeroPolynomial,
    #[error("interval does not isolate a root")]
    NotIsolating,
    #[error("discriminant is identically zero")]
    DegenerateDiscriminant,
    #[error("no geometric majorant could be certified for this node")]
    MajorantUnavailable,
    #[error("evaluation point not strictly inside the certified radii")]
    PointOutsideRadii,
    #[error("series is not regular in the last variable at the requested order")]
    NotRegular,
    #[error("series is not invertible (needs f(0)=0 and f'(0)!=0)")]
    NotInvertible,
    #[error("Jacobian in Y at the origin is singular")]
    SingularJacobian,
    #[error("logarithm argument must be positive")]
    NonpositiveArgument,
    #[error("invalid multi-index {index:?} for arity {arity}")]
    BadIndex { index: MultiIndex, arity: usize },
    #[error("invalid permutation")]
    BadPermutation,
    #[error("invalid construction: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
