//! Certified computer algebra for lazily evaluated power series built from
//! algebraic leaves and closure operations (reciprocal, substitution,
//! translation, antiderivative, complexification, Weierstrass structure),
//! with exact rational coefficients where possible and deterministic ball
//! enclosures everywhere else.

pub mod algebraic;
pub mod ball;
pub mod coeff;
pub mod dyadic;
pub mod error;
pub mod index;
pub mod poly;
pub mod rational;
pub mod sturm;

pub use ball::Ball;
pub use coeff::Coefficient;
pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use index::MultiIndex;
pub use poly::{MultiPoly, UniPoly};
