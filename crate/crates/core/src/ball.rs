use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use num_traits::Signed as _;

use crate::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};

/// Midpoint-radius enclosure `[mid - rad, mid + rad]` of a real number.
///
/// Addition, multiplication and negation of balls are exact on the dyadic
/// level; width control happens through [`Ball::round`], which rounds the
/// midpoint and absorbs the rounding error into the radius (outward).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub mid: Dyadic,
    pub rad: Dyadic,
}

impl Ball {
    pub fn new(mid: Dyadic, rad: Dyadic) -> Self {
        debug_assert!(!rad.is_negative());
        Ball { mid, rad }
    }

    pub fn exact(mid: Dyadic) -> Self {
        Ball { mid, rad: Dyadic::zero() }
    }

    pub fn zero() -> Self {
        Ball::exact(Dyadic::zero())
    }

    /// Enclosure of a rational at `prec` bits (exact when the rational is dyadic).
    pub fn from_rational(q: &BigRational, prec: u64) -> Self {
        let lo = Dyadic::from_rational(q, prec, Round::Down);
        let hi = Dyadic::from_rational(q, prec, Round::Up);
        Ball::from_endpoints(&lo, &hi)
    }

    /// Ball spanning `[lo, hi]`.
    pub fn from_endpoints(lo: &Dyadic, hi: &Dyadic) -> Self {
        debug_assert!(lo <= hi);
        let two = -1i64;
        let mid = lo.add(hi).mul_pow2(two);
        let rad = hi.sub(lo).mul_pow2(two);
        Ball { mid, rad }
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    pub fn add(&self, other: &Ball) -> Ball {
        Ball { mid: self.mid.add(&other.mid), rad: self.rad.add(&other.rad) }
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        Ball { mid: self.mid.sub(&other.mid), rad: self.rad.add(&other.rad) }
    }

    pub fn neg(&self) -> Ball {
        Ball { mid: self.mid.neg(), rad: self.rad.clone() }
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        // |xy - m1 m2| <= |m1| r2 + |m2| r1 + r1 r2
        let mid = self.mid.mul(&other.mid);
        let rad = self
            .mid
            .abs()
            .mul(&other.rad)
            .add(&other.mid.abs().mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        Ball { mid, rad }
    }

    /// Exact scaling by a power of two.
    pub fn mul_pow2(&self, k: i64) -> Ball {
        Ball { mid: self.mid.mul_pow2(k), rad: self.rad.mul_pow2(k) }
    }

    /// Enclosure of `self * q` at `prec` bits.
    pub fn mul_rational(&self, q: &BigRational, prec: u64) -> Ball {
        let f = Ball::from_rational(q, prec);
        self.mul(&f)
    }

    /// True when the interval excludes zero.
    pub fn excludes_zero(&self) -> bool {
        self.mid.abs() > self.rad
    }

    pub fn contains_zero(&self) -> bool {
        !self.excludes_zero()
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        let lo = self.lower().to_rational();
        let hi = self.upper().to_rational();
        lo <= *q && *q <= hi
    }

    pub fn is_exact_zero(&self) -> bool {
        self.mid.is_zero() && self.rad.is_zero()
    }

    /// Enclosure of the reciprocal at `prec` bits. Fails on intervals
    /// containing zero.
    pub fn recip(&self, prec: u64) -> Result<Ball> {
        if !self.excludes_zero() {
            return Err(Error::NonUnitReciprocal);
        }
        let lo = self.lower().to_rational();
        let hi = self.upper().to_rational();
        let (a, b) = (hi.recip(), lo.recip()); // both endpoints same sign
        let lo_d = Dyadic::from_rational(&a.clone().min(b.clone()), prec, Round::Down);
        let hi_d = Dyadic::from_rational(&a.max(b), prec, Round::Up);
        Ok(Ball::from_endpoints(&lo_d, &hi_d))
    }

    /// Enclosure of `self^n` by binary powering with rounding at `prec` bits.
    pub fn pow(&self, n: u64, prec: u64) -> Ball {
        let mut base = self.clone();
        let mut acc = Ball::exact(Dyadic::one());
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base).round(prec);
            }
            base = base.mul(&base).round(prec);
            n >>= 1;
        }
        acc
    }

    /// Round the midpoint to `prec` bits, growing the radius outward.
    pub fn round(&self, prec: u64) -> Ball {
        if self.mid.precision_bits() <= prec && self.rad.precision_bits() <= prec {
            return self.clone();
        }
        let lo = self.lower().round_to(prec, Round::Down);
        let hi = self.upper().round_to(prec, Round::Up);
        Ball::from_endpoints(&lo, &hi)
    }

    /// Upper bound on |x| over the ball, as a rational.
    pub fn abs_upper(&self) -> BigRational {
        let r = self.mid.abs().add(&self.rad);
        r.to_rational()
    }

    /// True if `other` is contained in `self`.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    /// True if the two intervals intersect.
    pub fn overlaps(&self, other: &Ball) -> bool {
        !(self.upper() < other.lower() || other.upper() < self.lower())
    }

    pub fn rad_rational(&self) -> BigRational {
        self.rad.to_rational()
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} +/- {}]", self.mid, self.rad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn arithmetic_encloses() {
        let x = Ball::from_rational(&rat(1, 3), 64);
        let y = Ball::from_rational(&rat(2, 7), 64);
        assert!(x.add(&y).contains_rational(&rat(13, 21)));
        assert!(x.mul(&y).contains_rational(&rat(2, 21)));
        assert!(x.sub(&y).contains_rational(&rat(1, 21)));
    }

    #[test]
    fn recip_encloses() {
        let x = Ball::from_rational(&rat(1, 3), 64);
        let r = x.recip(64).unwrap();
        assert!(r.contains_rational(&rat(3, 1)));
        let y = Ball::from_rational(&rat(-2, 5), 64);
        assert!(y.recip(64).unwrap().contains_rational(&rat(-5, 2)));
        let z = Ball::new(Dyadic::zero(), Dyadic::one());
        assert!(z.recip(64).is_err());
    }

    #[test]
    fn pow_and_round() {
        let x = Ball::from_rational(&rat(3, 2), 64);
        let p = x.pow(10, 64);
        assert!(p.contains_rational(&rat(59049, 1024)));
        let wide = Ball::from_rational(&rat(1, 3), 512);
        let rounded = wide.round(32);
        assert!(rounded.contains_ball(&wide));
        assert!(rounded.rad_rational() <= rat(1, 1 << 30));
    }

    #[test]
    fn zero_exclusion() {
        assert!(Ball::from_rational(&rat(1, 10), 64).excludes_zero());
        assert!(Ball::new(Dyadic::zero(), Dyadic::one()).contains_zero());
    }
}
