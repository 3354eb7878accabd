use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::index::MultiIndex;

/// Sparse multivariate polynomial over the rationals with explicit arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    pub arity: usize,
    pub terms: BTreeMap<MultiIndex, BigRational>,
}

impl MultiPoly {
    pub fn zero(arity: usize) -> Self {
        MultiPoly { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, c: BigRational) -> Self {
        let mut p = MultiPoly::zero(arity);
        if !c.is_zero() {
            p.terms.insert(MultiIndex::zero(arity), c);
        }
        p
    }

    pub fn one(arity: usize) -> Self {
        MultiPoly::constant(arity, BigRational::one())
    }

    /// The monomial `x_slot`.
    pub fn var(arity: usize, slot: usize) -> Self {
        let mut p = MultiPoly::zero(arity);
        p.terms.insert(MultiIndex::unit(arity, slot), BigRational::one());
        p
    }

    pub fn from_terms(arity: usize, terms: Vec<(MultiIndex, BigRational)>) -> Self {
        let mut p = MultiPoly::zero(arity);
        for (m, c) in terms {
            debug_assert_eq!(m.len(), arity);
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: MultiIndex, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &MultiIndex) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(&MultiIndex::zero(self.arity))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.arity, other.arity);
        let mut out = MultiPoly::zero(self.arity);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.add(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.arity);
        }
        MultiPoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Raise to a small power.
    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(self.arity);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Drop all terms of total degree above `n`.
    pub fn truncate_total(&self, n: u32) -> MultiPoly {
        MultiPoly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= n)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Sum of |coefficient| * prod rho_i^{alpha_i}: an upper bound for the
    /// sup of |p| on the complex polydisc with the given radii.
    pub fn sup_bound_on_box(&self, radii: &[BigRational]) -> BigRational {
        debug_assert_eq!(radii.len(), self.arity);
        let mut s = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.abs();
            for (i, r) in radii.iter().enumerate() {
                for _ in 0..m.get(i) {
                    t *= r;
                }
            }
            s += t;
        }
        s
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut s = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate() {
                for _ in 0..m.get(i) {
                    t *= x;
                }
            }
            s += t;
        }
        s
    }
}

/// Dense univariate polynomial over the rationals; coefficient `k` is the
/// coefficient of `X^k`. The representation keeps no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    pub coeffs: Vec<BigRational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn constant(c: BigRational) -> Self {
        UniPoly::new(vec![c])
    }

    pub fn from_ints(cs: &[i64]) -> Self {
        UniPoly::new(cs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn x() -> Self {
        UniPoly::from_ints(&[0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) + other.coeff(k));
        }
        UniPoly::new(out)
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn scale(&self, c: &BigRational) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|v| v * c).collect())
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Euclidean division: returns (quotient, remainder).
    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.degree().unwrap();
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigRational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1;
            let c = rem[k].clone();
            if c.is_zero() {
                rem.pop();
                continue;
            }
            let q = &c / &lead;
            let shift = k - dd;
            quot[shift] = q.clone();
            for (j, b) in divisor.coeffs.iter().enumerate() {
                rem[shift + j] -= &q * b;
            }
            rem.pop();
        }
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading();
        a.scale(&lead.recip())
    }

    /// Squarefree part `p / gcd(p, p')`, made monic.
    pub fn squarefree_part(&self) -> UniPoly {
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) || g.is_zero() {
            let lead = self.leading();
            return self.scale(&lead.recip());
        }
        let (q, r) = self.div_rem(&g);
        debug_assert!(r.is_zero());
        let lead = q.leading();
        q.scale(&lead.recip())
    }

    /// X-adic valuation: index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Divide by X^k exactly (panics if the valuation is smaller).
    pub fn shift_down(&self, k: usize) -> UniPoly {
        assert!(self.valuation().map(|v| v >= k).unwrap_or(true));
        UniPoly::new(self.coeffs.iter().skip(k).cloned().collect())
    }

    pub fn sup_bound_on_disc(&self, radius: &BigRational) -> BigRational {
        let mut s = BigRational::zero();
        let mut pw = BigRational::one();
        for c in &self.coeffs {
            s += c.abs() * &pw;
            pw *= radius;
        }
        s
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
    fn multipoly_ring() {
        // (1 - x)(1 + x) = 1 - x^2
        let one_minus = MultiPoly::from_terms(
            1,
            vec![
                (MultiIndex(vec![0]), rat(1, 1)),
                (MultiIndex(vec![1]), rat(-1, 1)),
            ],
        );
        let one_plus = MultiPoly::from_terms(
            1,
            vec![
                (MultiIndex(vec![0]), rat(1, 1)),
                (MultiIndex(vec![1]), rat(1, 1)),
            ],
        );
        let prod = one_minus.mul(&one_plus);
        assert_eq!(prod.coeff(&MultiIndex(vec![0])), rat(1, 1));
        assert_eq!(prod.coeff(&MultiIndex(vec![1])), rat(0, 1));
        assert_eq!(prod.coeff(&MultiIndex(vec![2])), rat(-1, 1));
    }

    #[test]
    fn unipoly_divmod_gcd() {
        // (x-1)(x-2) = x^2 - 3x + 2
        let p = UniPoly::from_ints(&[2, -3, 1]);
        let d = UniPoly::from_ints(&[-1, 1]);
        let (q, r) = p.div_rem(&d);
        assert!(r.is_zero());
        assert_eq!(q, UniPoly::from_ints(&[-2, 1]));

        let a = UniPoly::from_ints(&[2, -3, 1]); // (x-1)(x-2)
        let b = UniPoly::from_ints(&[-2, 3, -1]).neg(); // same roots
        let g = a.gcd(&b);
        assert_eq!(g.degree(), Some(2));

        // squarefree part of (x-1)^2 (x+3)
        let sq = UniPoly::from_ints(&[-1, 1]).mul(&UniPoly::from_ints(&[-1, 1]));
        let p = sq.mul(&UniPoly::from_ints(&[3, 1]));
        let sf = p.squarefree_part();
        assert_eq!(sf.degree(), Some(2));
        assert!(sf.eval(&rat(1, 1)).is_zero());
        assert!(sf.eval(&rat(-3, 1)).is_zero());
    }
}
