use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A dyadic rational `mantissa * 2^exponent` with arbitrary-size mantissa.
///
/// Addition, multiplication and negation are exact; rounding happens only
/// through the explicit directed operations, which keeps enclosures
/// deterministic.
#[derive(Debug, Clone)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

/// Rounding direction for directed conversions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        Dyadic { mantissa, exponent }.normalized()
    }

    pub fn zero() -> Self {
        Dyadic { mantissa: BigInt::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mantissa: BigInt::one(), exponent: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// `2^k`.
    pub fn power_of_two(k: i64) -> Self {
        Dyadic { mantissa: BigInt::one(), exponent: k }
    }

    fn normalized(mut self) -> Self {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return self;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz;
            self.exponent += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn neg(&self) -> Self {
        Dyadic { mantissa: -&self.mantissa, exponent: self.exponent }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    pub fn add(&self, other: &Dyadic) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Self {
        Dyadic::new(&self.mantissa * &other.mantissa, self.exponent + other.exponent)
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mantissa: self.mantissa.clone(), exponent: self.exponent + k }
    }

    /// Number of significant bits of the mantissa.
    pub fn precision_bits(&self) -> u64 {
        self.mantissa.bits()
    }

    /// Directed rounding to at most `prec` mantissa bits.
    pub fn round_to(&self, prec: u64, dir: Round) -> Self {
        let bits = self.mantissa.bits();
        if bits <= prec {
            return self.clone();
        }
        let drop = (bits - prec) as i64;
        let shifted = &self.mantissa >> drop as u64;
        let back = &shifted << drop as u64;
        let exact = back == self.mantissa;
        let mut m = shifted;
        if !exact {
            // BigInt shr truncates toward negative infinity, so the shifted
            // value is already the floor; bump for upward rounding.
            if dir == Round::Up {
                m += 1;
            }
        }
        Dyadic::new(m, self.exponent + drop)
    }

    pub fn cmp_dyadic(&self, other: &Dyadic) -> Ordering {
        match self.sub(other).mantissa.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    pub fn to_rational(&self) -> BigRational {
        let two = BigInt::from(2);
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa * two.pow(self.exponent as u32))
        } else {
            BigRational::new(self.mantissa.clone(), two.pow((-self.exponent) as u32))
        }
    }

    /// Directed conversion from a rational at `prec` bits.
    pub fn from_rational(q: &BigRational, prec: u64, dir: Round) -> Self {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let num = q.numer();
        let den = q.denom();
        // Find scale k with |num| * 2^k / den having about `prec` bits.
        let k = prec as i64 + den.bits() as i64 - num.bits() as i64 + 1;
        let scaled: BigInt = if k >= 0 { num << k as u64 } else { num >> (-k) as u64 };
        let (mut m, rem) = num_integer::Integer::div_rem(&scaled, den);
        // div_rem truncates toward zero; normalize to floor first.
        if rem.is_negative() {
            m -= 1;
        }
        let floor_exact = rem.is_zero();
        if dir == Round::Up && !floor_exact {
            m += 1;
        }
        Dyadic::new(m, -k)
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_dyadic(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_dyadic(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_dyadic(other)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_ring_ops() {
        let a = Dyadic::new(BigInt::from(3), -2); // 3/4
        let b = Dyadic::new(BigInt::from(5), -1); // 5/2
        assert_eq!(a.add(&b).to_rational(), rat(13, 4));
        assert_eq!(a.mul(&b).to_rational(), rat(15, 8));
        assert_eq!(a.sub(&b).to_rational(), rat(-7, 4));
    }

    #[test]
    fn directed_rational_conversion() {
        let third = rat(1, 3);
        let lo = Dyadic::from_rational(&third, 20, Round::Down);
        let hi = Dyadic::from_rational(&third, 20, Round::Up);
        assert!(lo.to_rational() <= third && third <= hi.to_rational());
        assert!(hi.sub(&lo).to_rational() <= rat(1, 1 << 20));
        // Negative values round symmetrically around the true value.
        let q = rat(-1, 7);
        let lo = Dyadic::from_rational(&q, 16, Round::Down);
        let hi = Dyadic::from_rational(&q, 16, Round::Up);
        assert!(lo.to_rational() <= q && q <= hi.to_rational());
    }

    #[test]
    fn directed_rounding() {
        let x = Dyadic::new(BigInt::from(0b101011), 0); // 43
        let down = x.round_to(3, Round::Down);
        let up = x.round_to(3, Round::Up);
        assert!(down.to_rational() <= x.to_rational());
        assert!(up.to_rational() >= x.to_rational());
        assert_eq!(down.to_rational(), rat(40, 1));
        assert_eq!(up.to_rational(), rat(48, 1));
        let y = x.neg();
        let down = y.round_to(3, Round::Down);
        let up = y.round_to(3, Round::Up);
        assert!(down.to_rational() <= y.to_rational());
        assert!(up.to_rational() >= y.to_rational());
    }
}
