use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Parse a decimal literal like `-3.14159` into an exact rational.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let num: BigInt = digits.parse().ok()?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(num * BigInt::from(sign), den))
}

/// Parse `p` or `p/q` (with q > 0 enforced by normalization).
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let num: BigInt = n.trim().parse().ok()?;
            let den: BigInt = d.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(BigRational::new(num, den))
        }
        None => {
            let num: BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(num))
        }
    }
}

pub fn rat_i64(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `10^-digits`.
pub fn pow10_neg(digits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(digits))
}

/// `q^k` for signed k.
pub fn pow_rat(q: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        let mut acc = BigRational::one();
        for _ in 0..k {
            acc *= q;
        }
        acc
    } else {
        pow_rat(q, -k).recip()
    }
}

/// Smallest number of bits b with `2^-b <= q`, for positive q; used to turn
/// tolerances into working precisions.
pub fn bits_for_tolerance(q: &BigRational) -> u64 {
    debug_assert!(q.is_positive());
    let mut b = 0u64;
    let mut t = BigRational::one();
    let half = rat_i64(1, 2);
    while &t > q && b < 1 << 24 {
        t *= &half;
        b += 1;
    }
    b
}

/// Rational lower bound on sqrt(q) for q >= 0: returns s with s^2 <= q.
pub fn sqrt_lower(q: &BigRational) -> BigRational {
    if q.is_negative() || q.is_zero() {
        return BigRational::zero();
    }
    // sqrt(n/d) = sqrt(n*d*4^k) / (d*2^k); the floor integer square root of
    // the scaled radicand gives a lower bound accurate to ~k bits.
    let k = 64u64;
    let nd: BigInt = (q.numer() << (2 * k)) * q.denom();
    let s = nd.sqrt();
    BigRational::new(s, q.denom() << k)
}

/// Rational upper bound on q^(1/k) for q > 0, k >= 1.
pub fn root_upper(q: &BigRational, k: u32) -> BigRational {
    debug_assert!(q.is_positive() && k >= 1);
    if k == 1 {
        return q.clone();
    }
    // Bracket by doubling, then bisect a fixed number of times.
    let one = BigRational::one();
    let two = rat_int(2);
    let mut hi = one.clone();
    if q > &one {
        while &pow_rat(&hi, k as i64) < q {
            hi *= &two;
        }
    }
    let mut lo = if q < &one { BigRational::zero() } else { &hi / &two };
    for _ in 0..32 {
        let mid = (&lo + &hi) / &two;
        if &pow_rat(&mid, k as i64) >= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Exact factorial as a rational.
pub fn factorial(n: u64) -> BigRational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    BigRational::from_integer(acc)
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigRational {
    if k > n {
        return BigRational::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_and_ratio_parsing() {
        assert_eq!(parse_decimal("0.5").unwrap(), rat_i64(1, 2));
        assert_eq!(parse_decimal("-2.25").unwrap(), rat_i64(-9, 4));
        assert_eq!(parse_ratio("-7/2").unwrap(), rat_i64(-7, 2));
        assert_eq!(parse_ratio("13").unwrap(), rat_int(13));
        assert!(parse_ratio("1/0").is_none());
    }

    #[test]
    fn root_bounds() {
        let q = rat_i64(64, 39);
        let u = root_upper(&q, 2);
        assert!(&u * &u >= q);
        let s = sqrt_lower(&rat_int(2));
        assert!(&s * &s <= rat_int(2));
        assert!(s > rat_i64(14, 10));
    }

    #[test]
    fn combinatorics() {
        assert_eq!(factorial(5), rat_int(120));
        assert_eq!(binomial(7, 3), rat_int(35));
        assert_eq!(binomial(3, 5), rat_int(0));
    }

    #[test]
    fn tolerance_bits() {
        assert_eq!(bits_for_tolerance(&rat_i64(1, 4)), 2);
        assert_eq!(bits_for_tolerance(&rat_int(1)), 0);
        assert_eq!(bits_for_tolerance(&rat_i64(1, 1000)), 10);
    }
}
