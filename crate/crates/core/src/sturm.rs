use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::Ball;
use crate::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};
use crate::poly::UniPoly;

/// An interval with rational endpoints containing exactly one real root of
/// its polynomial. A zero-width interval marks an exact rational root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolatingInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl IsolatingInterval {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.lo <= *x && *x <= self.hi
    }
}

/// Sturm chain of a squarefree polynomial.
fn sturm_chain(p: &UniPoly) -> Vec<UniPoly> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            break;
        }
        let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(r.neg());
    }
    chain
}

fn sign_variations(chain: &[UniPoly], x: &BigRational) -> usize {
    let mut count = 0;
    let mut last: Option<bool> = None;
    for p in chain {
        let v = p.eval(x);
        if v.is_zero() {
            continue;
        }
        let s = v.is_positive();
        if let Some(prev) = last {
            if prev != s {
                count += 1;
            }
        }
        last = Some(s);
    }
    count
}

/// Number of distinct real roots of the (squarefree) chain polynomial in `(lo, hi]`.
fn count_roots(chain: &[UniPoly], lo: &BigRational, hi: &BigRational) -> usize {
    sign_variations(chain, lo).saturating_sub(sign_variations(chain, hi))
}

/// Cauchy bound: every real root lies in `[-b, b]`.
pub fn root_bound(p: &UniPoly) -> BigRational {
    let lead = p.leading().abs();
    let mut m = BigRational::zero();
    if let Some(d) = p.degree() {
        for k in 0..d {
            let r = p.coeff(k).abs() / &lead;
            if r > m {
                m = r;
            }
        }
    }
    BigRational::one() + m
}

/// Isolate every distinct real root of `p` into pairwise-disjoint intervals,
/// sorted in increasing order. Exact rational roots come back as zero-width
/// intervals.
pub fn isolate_real_roots(p: &UniPoly) -> Result<Vec<IsolatingInterval>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree() == Some(0) {
        return Ok(vec![]);
    }
    let sf = p.squarefree_part();
    let chain = sturm_chain(&sf);
    let b = root_bound(&sf);
    let lo = -&b;
    let hi = b;
    let mut out = Vec::new();
    let mut stack = vec![(lo, hi)];
    while let Some((a, b)) = stack.pop() {
        // Invariant: sf(a) != 0 is not guaranteed at the outer bound, but the
        // Cauchy bound is strict, so sf(+-bound) != 0 there; interior splits
        // land on midpoints which are tested for exact roots below.
        let n = count_roots(&chain, &a, &b);
        if n == 0 {
            continue;
        }
        if n == 1 {
            out.push(IsolatingInterval { lo: a, hi: b });
            continue;
        }
        let mid = (&a + &b) / BigRational::from_integer(2.into());
        if sf.eval(&mid).is_zero() {
            out.push(IsolatingInterval { lo: mid.clone(), hi: mid.clone() });
            // Nudge the split so the exact root is excluded from both halves.
            let quarter = (&b - &a) / BigRational::from_integer(4.into());
            let mut left_hi = &mid - &quarter;
            // (left_hi, mid] must contain only the exact root itself.
            while sf.eval(&left_hi).is_zero() || count_roots(&chain, &left_hi, &mid) > 1 {
                left_hi = (&left_hi + &mid) / BigRational::from_integer(2.into());
                if (&mid - &left_hi).abs() < BigRational::new(BigInt::one(), BigInt::from(1u64 << 60)) {
                    break;
                }
            }
            let mut right_lo = &mid + &quarter;
            while sf.eval(&right_lo).is_zero()
                || count_roots(&chain, &mid, &right_lo) > 0
            {
                right_lo = (&right_lo + &mid) / BigRational::from_integer(2.into());
                if (&right_lo - &mid).abs() < BigRational::new(BigInt::one(), BigInt::from(1u64 << 60)) {
                    break;
                }
            }
            stack.push((a, left_hi));
            stack.push((right_lo, b));
        } else {
            stack.push((a, mid.clone()));
            stack.push((mid, b));
        }
    }
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    Ok(out)
}

/// Shrink an isolating interval around its root until the enclosing ball has
/// radius at most `eps`. Sign-based bisection with exact rational arithmetic;
/// an exact rational root yields a zero-width ball.
pub fn refine_root(p: &UniPoly, iv: &IsolatingInterval, eps: &BigRational) -> Result<Ball> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if eps <= &BigRational::zero() {
        return Err(Error::Invalid("eps must be positive".into()));
    }
    let sf = p.squarefree_part();
    if iv.width().is_zero() {
        if !sf.eval(&iv.lo).is_zero() {
            return Err(Error::NotIsolating);
        }
        return Ok(ball_from_rationals(&iv.lo, &iv.hi, eps));
    }
    let mut lo = iv.lo.clone();
    let mut hi = iv.hi.clone();
    let mut flo = sf.eval(&lo);
    let fhi = sf.eval(&hi);
    if flo.is_zero() {
        return Ok(ball_from_rationals(&lo, &lo, eps));
    }
    if fhi.is_zero() {
        return Ok(ball_from_rationals(&hi, &hi, eps));
    }
    if flo.is_positive() == fhi.is_positive() {
        // No sign change: either not isolating, or the root count must be
        // re-checked via the Sturm chain.
        let chain = sturm_chain(&sf);
        if count_roots(&chain, &lo, &hi) != 1 {
            return Err(Error::NotIsolating);
        }
        // A tangency cannot happen for a squarefree polynomial with a sign
        // test at both ends; treat defensively.
        return Err(Error::NotIsolating);
    }
    let two = BigRational::from_integer(2.into());
    while &hi - &lo > eps + eps {
        let mid = (&lo + &hi) / &two;
        let fmid = sf.eval(&mid);
        if fmid.is_zero() {
            return Ok(ball_from_rationals(&mid, &mid, eps));
        }
        if fmid.is_positive() == flo.is_positive() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(ball_from_rationals(&lo, &hi, eps))
}

/// Ball spanning `[lo, hi]` with enough dyadic precision to keep the
/// conversion slack below `eps / 4`.
fn ball_from_rationals(lo: &BigRational, hi: &BigRational, eps: &BigRational) -> Ball {
    let mut prec = 64u64;
    loop {
        let lo_d = Dyadic::from_rational(lo, prec, Round::Down);
        let hi_d = Dyadic::from_rational(hi, prec, Round::Up);
        let b = Ball::from_endpoints(&lo_d, &hi_d);
        let slack = (hi_d.to_rational() - lo_d.to_rational()) - (hi - lo);
        if &slack * BigRational::from_integer(4.into()) <= *eps || prec > 1 << 20 {
            return b;
        }
        prec *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn isolates_sqrt2() {
        let p = UniPoly::from_ints(&[-2, 0, 1]);
        let roots = isolate_real_roots(&p).unwrap();
        assert_eq!(roots.len(), 2);
        // disjoint and each refinable onto the true roots
        assert!(roots[0].hi <= roots[1].lo);
        let eps = rat(1, 1_000_000);
        let neg = refine_root(&p, &roots[0], &eps).unwrap();
        let pos = refine_root(&p, &roots[1], &eps).unwrap();
        assert!(pos.mid.to_rational() > rat(14, 10));
        assert!(neg.mid.to_rational() < rat(-14, 10));
    }

    #[test]
    fn no_real_roots() {
        let p = UniPoly::from_ints(&[1, 0, 1]);
        assert!(isolate_real_roots(&p).unwrap().is_empty());
    }

    #[test]
    fn three_known_roots() {
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let p = UniPoly::from_ints(&[-6, 11, -6, 1]);
        let roots = isolate_real_roots(&p).unwrap();
        assert_eq!(roots.len(), 3);
        for (iv, r) in roots.iter().zip([1i64, 2, 3]) {
            assert!(iv.contains(&rat(r, 1)));
        }
    }

    #[test]
    fn refine_rational_root_is_exact() {
        // 2x - 1 on [0, 1]
        let p = UniPoly::from_ints(&[-1, 2]);
        let iv = IsolatingInterval { lo: rat(0, 1), hi: rat(1, 1) };
        let b = refine_root(&p, &iv, &rat(1, 1000)).unwrap();
        assert!(b.rad.is_zero());
        assert!(b.contains_rational(&rat(1, 2)));
    }

    #[test]
    fn refine_sqrt2() {
        let p = UniPoly::from_ints(&[-2, 0, 1]);
        let iv = IsolatingInterval { lo: rat(1, 1), hi: rat(2, 1) };
        let eps = rat(1, 10_000_000_000i64);
        let b = refine_root(&p, &iv, &eps).unwrap();
        assert!(b.rad_rational() <= eps);
        // sqrt(2) = 1.41421356237309504880...
        let oracle = "1.4142135623730950488016887242096980785696718753769480731766797";
        let q = crate::rational::parse_decimal(oracle).unwrap();
        assert!(b.contains_rational(&q) || (b.mid.to_rational() - &q).abs() < rat(1, 1_000_000_000));
    }

    #[test]
    fn repeated_roots_still_isolate() {
        // (x-1)^2 (x+2)
        let p = UniPoly::from_ints(&[-1, 1]).mul(&UniPoly::from_ints(&[-1, 1])).mul(&UniPoly::from_ints(&[2, 1]));
        let roots = isolate_real_roots(&p).unwrap();
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn randomized_against_dense_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let deg = rng.gen_range(1..=6);
            let mut cs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-10..=10)).collect();
            if cs[deg] == 0 {
                cs[deg] = 1;
            }
            let p = UniPoly::new(cs.iter().map(|&c| rat(c, 1)).collect());
            if p.is_zero() || p.degree() == Some(0) {
                continue;
            }
            let roots = isolate_real_roots(&p).unwrap();
            // Naive counter: dense sampling on a fine grid for sign changes of
            // the squarefree part, plus exact hits.
            let sf = p.squarefree_part();
            let b = root_bound(&sf);
            let steps = 4000i64;
            let mut naive = 0usize;
            let mut prev: Option<bool> = None;
            for k in 0..=steps {
                let x = &(-&b) + (&b + &b) * rat(k, steps);
                let v = sf.eval(&x);
                if v.is_zero() {
                    naive += 1;
                    prev = None;
                    continue;
                }
                let s = v.is_positive();
                if let Some(ps) = prev {
                    if ps != s {
                        naive += 1;
                    }
                }
                prev = Some(s);
            }
            // Dense sampling can only undercount (roots closer than the grid).
            assert!(roots.len() >= naive, "sturm found fewer roots than sampling: {:?}", p);
            // And each isolating interval really contains a sign change or exact root.
            for iv in &roots {
                if iv.width().is_zero() {
                    assert!(sf.eval(&iv.lo).is_zero());
                } else {
                    let chain = sturm_chain(&sf);
                    assert_eq!(count_roots(&chain, &iv.lo, &iv.hi), 1);
                }
            }
        }
    }
}
