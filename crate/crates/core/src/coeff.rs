use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::ball::Ball;
use crate::error::{Error, Result};

/// One Taylor coefficient: exact when the derivation needs only ring
/// operations over the rationals, a certified enclosure when a translation
/// sits above it in the derivation.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Exact(BigRational),
    Certified(Ball),
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Exact(BigRational::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coefficient::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Coefficient::Exact(q) => Some(q),
            Coefficient::Certified(_) => None,
        }
    }

    pub fn to_ball(&self, prec: u64) -> Ball {
        match self {
            Coefficient::Exact(q) => Ball::from_rational(q, prec),
            Coefficient::Certified(b) => b.clone(),
        }
    }

    pub fn add(&self, other: &Coefficient, prec: u64) -> Coefficient {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => Coefficient::Exact(a + b),
            _ => Coefficient::Certified(self.to_ball(prec).add(&other.to_ball(prec)).round(prec)),
        }
    }

    pub fn mul(&self, other: &Coefficient, prec: u64) -> Coefficient {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => Coefficient::Exact(a * b),
            _ => Coefficient::Certified(self.to_ball(prec).mul(&other.to_ball(prec)).round(prec)),
        }
    }

    pub fn neg(&self) -> Coefficient {
        match self {
            Coefficient::Exact(q) => Coefficient::Exact(-q),
            Coefficient::Certified(b) => Coefficient::Certified(b.neg()),
        }
    }

    pub fn sub(&self, other: &Coefficient, prec: u64) -> Coefficient {
        self.add(&other.neg(), prec)
    }

    pub fn mul_rational(&self, q: &BigRational, prec: u64) -> Coefficient {
        match self {
            Coefficient::Exact(a) => Coefficient::Exact(a * q),
            Coefficient::Certified(b) => Coefficient::Certified(b.mul_rational(q, prec).round(prec)),
        }
    }

    pub fn recip(&self, prec: u64) -> Result<Coefficient> {
        match self {
            Coefficient::Exact(q) => {
                if q.is_zero() {
                    Err(Error::NonUnitReciprocal)
                } else {
                    Ok(Coefficient::Exact(q.recip()))
                }
            }
            Coefficient::Certified(b) => Ok(Coefficient::Certified(b.recip(prec)?)),
        }
    }

    /// Exactly zero (zero rational or zero-width zero ball).
    pub fn is_provably_zero(&self) -> bool {
        match self {
            Coefficient::Exact(q) => q.is_zero(),
            Coefficient::Certified(b) => b.is_exact_zero(),
        }
    }

    pub fn is_provably_nonzero(&self) -> bool {
        match self {
            Coefficient::Exact(q) => !q.is_zero(),
            Coefficient::Certified(b) => b.excludes_zero(),
        }
    }

    /// Upper bound on the absolute value.
    pub fn abs_upper(&self) -> BigRational {
        match self {
            Coefficient::Exact(q) => q.abs(),
            Coefficient::Certified(b) => b.abs_upper(),
        }
    }

    /// Lower bound on the absolute value (zero when the enclosure straddles 0).
    pub fn abs_lower(&self) -> BigRational {
        match self {
            Coefficient::Exact(q) => q.abs(),
            Coefficient::Certified(b) => {
                let lo = b.mid.abs().sub(&b.rad).to_rational();
                if lo.is_negative() {
                    BigRational::zero()
                } else {
                    lo
                }
            }
        }
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        match self {
            Coefficient::Exact(v) => v == q,
            Coefficient::Certified(b) => b.contains_rational(q),
        }
    }

    /// Enclosure width: 0 for exact values.
    pub fn width(&self) -> BigRational {
        match self {
            Coefficient::Exact(_) => BigRational::zero(),
            Coefficient::Certified(b) => b.rad_rational() * BigRational::from_integer(2.into()),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(q) => write!(f, "{}", q),
            Coefficient::Certified(b) => write!(f, "{}", b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_i64;

    #[test]
    fn exact_stays_exact() {
        let a = Coefficient::Exact(rat_i64(1, 3));
        let b = Coefficient::Exact(rat_i64(1, 6));
        assert_eq!(a.add(&b, 64), Coefficient::Exact(rat_i64(1, 2)));
        assert_eq!(a.mul(&b, 64), Coefficient::Exact(rat_i64(1, 18)));
        assert!(a.add(&b, 64).is_exact());
    }

    #[test]
    fn mixed_promotes_to_ball() {
        let a = Coefficient::Exact(rat_i64(1, 3));
        let b = Coefficient::Certified(Ball::from_rational(&rat_i64(1, 6), 64));
        let s = a.add(&b, 64);
        assert!(!s.is_exact());
        assert!(s.contains_rational(&rat_i64(1, 2)));
    }
}
