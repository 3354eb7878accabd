//! Crate-internal arithmetic on truncated series with `Coefficient` entries,
//! shared by the composition, inversion, implicit-function and Weierstrass
//! engines. Maps hold only nonzero entries; truncation is by total degree.

use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::coeff::Coefficient;
use crate::index::MultiIndex;

pub(crate) type CoeffMap = BTreeMap<MultiIndex, Coefficient>;

pub(crate) fn map_add_into(acc: &mut CoeffMap, m: MultiIndex, c: Coefficient, prec: u64) {
    if c.is_provably_zero() {
        return;
    }
    match acc.remove(&m) {
        None => {
            acc.insert(m, c);
        }
        Some(prev) => {
            let s = prev.add(&c, prec);
            if !s.is_provably_zero() {
                acc.insert(m, s);
            }
        }
    }
}

pub(crate) fn map_mul_trunc(a: &CoeffMap, b: &CoeffMap, order: u32, prec: u64) -> CoeffMap {
    let mut out = CoeffMap::new();
    for (ma, ca) in a {
        if ma.degree() > order {
            continue;
        }
        for (mb, cb) in b {
            let m = ma.add(mb);
            if m.degree() > order {
                continue;
            }
            map_add_into(&mut out, m, ca.mul(cb, prec), prec);
        }
    }
    out
}

pub(crate) fn map_scale(a: &CoeffMap, q: &BigRational, prec: u64) -> CoeffMap {
    a.iter()
        .map(|(m, c)| (m.clone(), c.mul_rational(q, prec)))
        .filter(|(_, c)| !c.is_provably_zero())
        .collect()
}

pub(crate) fn map_sub(a: &CoeffMap, b: &CoeffMap, prec: u64) -> CoeffMap {
    let mut out = a.clone();
    for (m, c) in b {
        map_add_into(&mut out, m.clone(), c.neg(), prec);
    }
    out
}

pub(crate) fn map_get(a: &CoeffMap, m: &MultiIndex) -> Coefficient {
    a.get(m).cloned().unwrap_or_else(Coefficient::zero)
}

/// Reciprocal of a unit truncated series: triangular recurrence in total
/// degree. The constant term must be provably nonzero.
pub(crate) fn map_recip_trunc(
    a: &CoeffMap,
    arity: usize,
    order: u32,
    prec: u64,
) -> crate::error::Result<CoeffMap> {
    let zero = MultiIndex::zero(arity);
    let a0 = map_get(a, &zero);
    let inv0 = a0.recip(prec)?;
    let mut out = CoeffMap::new();
    out.insert(zero.clone(), inv0.clone());
    for d in 1..=order {
        for alpha in MultiIndex::all_of_degree(arity, d) {
            let mut s = Coefficient::zero();
            for (beta, ab) in a {
                if beta.degree() == 0 || !beta.le(&alpha) {
                    continue;
                }
                let rest = alpha.checked_sub(beta).unwrap();
                let c = map_get(&out, &rest);
                if c.is_provably_zero() {
                    continue;
                }
                s = s.add(&ab.mul(&c, prec), prec);
            }
            let val = s.neg().mul(&inv0, prec);
            if !val.is_provably_zero() {
                out.insert(alpha, val);
            }
        }
    }
    Ok(out)
}

/// Composite `f(args_1, ..., args_m)` truncated to total degree `order`.
/// Every `args_j` must have zero constant term; `f_window` must contain all
/// coefficients of `f` up to total degree `order`.
pub(crate) fn compose_maps(
    f_window: &CoeffMap,
    f_arity: usize,
    args: &[CoeffMap],
    out_arity: usize,
    order: u32,
    prec: u64,
) -> CoeffMap {
    debug_assert_eq!(args.len(), f_arity);
    let mut acc = CoeffMap::new();
    let one = {
        let mut m = CoeffMap::new();
        m.insert(MultiIndex::zero(out_arity), Coefficient::Exact(num_traits::One::one()));
        m
    };
    let mut beta = vec![0u32; f_arity];
    dfs(f_window, args, order, prec, 0, order, &one, &mut beta, &mut acc);
    acc
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    f_window: &CoeffMap,
    args: &[CoeffMap],
    order: u32,
    prec: u64,
    slot: usize,
    budget: u32,
    prod: &CoeffMap,
    beta: &mut Vec<u32>,
    acc: &mut CoeffMap,
) {
    if slot == args.len() {
        let fb = map_get(f_window, &MultiIndex(beta.clone()));
        if fb.is_provably_zero() {
            return;
        }
        for (m, c) in prod {
            map_add_into(acc, m.clone(), c.mul(&fb, prec), prec);
        }
        return;
    }
    let mut p = prod.clone();
    for e in 0..=budget {
        if e > 0 {
            p = map_mul_trunc(&p, &args[slot], order, prec);
            if p.is_empty() {
                break;
            }
        }
        beta[slot] = e;
        dfs(f_window, args, order, prec, slot + 1, budget - e, &p, beta, acc);
    }
    beta[slot] = 0;
}

// ---- dense univariate truncations (inverse-function engine) ----

#[derive(Debug, Clone)]
pub(crate) struct USeries(pub Vec<Coefficient>);

impl USeries {
    pub fn zero() -> Self {
        USeries(vec![])
    }

    pub fn coeff(&self, k: usize) -> Coefficient {
        self.0.get(k).cloned().unwrap_or_else(Coefficient::zero)
    }

    pub fn identity(order: usize) -> Self {
        let mut v = vec![Coefficient::zero(); (order + 1).max(2)];
        v[1] = Coefficient::Exact(num_traits::One::one());
        USeries(v)
    }

    pub fn truncated(&self, order: usize) -> USeries {
        USeries(self.0.iter().take(order + 1).cloned().collect())
    }

    pub fn mul_trunc(&self, other: &USeries, order: usize, prec: u64) -> USeries {
        let mut out = vec![Coefficient::zero(); order + 1];
        for (i, a) in self.0.iter().enumerate().take(order + 1) {
            if a.is_provably_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                if i + j > order {
                    break;
                }
                out[i + j] = out[i + j].add(&a.mul(b, prec), prec);
            }
        }
        USeries(out)
    }

    pub fn sub(&self, other: &USeries, prec: u64) -> USeries {
        let n = self.0.len().max(other.0.len());
        USeries((0..n).map(|k| self.coeff(k).sub(&other.coeff(k), prec)).collect())
    }

    /// `sum_k f_k g^k` truncated, via Horner; `g` must have zero constant term.
    pub fn compose_trunc(f: &[Coefficient], g: &USeries, order: usize, prec: u64) -> USeries {
        let mut acc = USeries::zero();
        for fk in f.iter().rev() {
            let mut next = acc.mul_trunc(g, order, prec);
            if next.0.is_empty() {
                next.0.push(Coefficient::zero());
            }
            next.0[0] = next.0[0].add(fk, prec);
            acc = next;
        }
        acc.truncated(order)
    }

    pub fn recip_trunc(&self, order: usize, prec: u64) -> crate::error::Result<USeries> {
        let inv0 = self.coeff(0).recip(prec)?;
        let mut out = vec![Coefficient::zero(); order + 1];
        out[0] = inv0.clone();
        for k in 1..=order {
            let mut s = Coefficient::zero();
            for j in 1..=k.min(self.0.len().saturating_sub(1)) {
                s = s.add(&self.0[j].mul(&out[k - j], prec), prec);
            }
            out[k] = s.neg().mul(&inv0, prec);
        }
        Ok(USeries(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_i64;

    fn exact(n: i64, d: i64) -> Coefficient {
        Coefficient::Exact(rat_i64(n, d))
    }

    #[test]
    fn uni_recip_geometric() {
        // 1/(1 - x) = 1 + x + x^2 + ...
        let s = USeries(vec![exact(1, 1), exact(-1, 1)]);
        let r = s.recip_trunc(5, 64).unwrap();
        for k in 0..=5 {
            assert_eq!(r.coeff(k), exact(1, 1));
        }
    }

    #[test]
    fn map_recip_matches_uni() {
        let mut a = CoeffMap::new();
        a.insert(MultiIndex(vec![0]), exact(1, 1));
        a.insert(MultiIndex(vec![1]), exact(-1, 1));
        let r = map_recip_trunc(&a, 1, 5, 64).unwrap();
        for k in 0..=5u32 {
            assert_eq!(map_get(&r, &MultiIndex(vec![k])), exact(1, 1));
        }
    }

    #[test]
    fn compose_geometric_with_2x() {
        // f = 1/(1-u) as window, arg = 2x: expect 2^p
        let mut f = CoeffMap::new();
        for k in 0..=6u32 {
            f.insert(MultiIndex(vec![k]), exact(1, 1));
        }
        let mut arg = CoeffMap::new();
        arg.insert(MultiIndex(vec![1]), exact(2, 1));
        let out = compose_maps(&f, 1, &[arg], 1, 6, 64);
        for k in 0..=6u32 {
            assert_eq!(map_get(&out, &MultiIndex(vec![k])), exact(1 << k, 1));
        }
    }
}
