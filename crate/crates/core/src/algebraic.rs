use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::UniPoly;
use crate::rational::sqrt_lower;
use crate::sturm;

/// A univariate algebraic power series, given by a bivariate defining
/// polynomial `P(X, Y) = sum_j rows[j](X) * Y^j` together with a rational
/// branch point: `P(0, y0) = 0` with `dP/dY(0, y0) != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraicSeriesDef {
    pub rows: Vec<UniPoly>,
    pub y0: BigRational,
}

impl AlgebraicSeriesDef {
    pub fn new(rows: Vec<UniPoly>, y0: BigRational) -> Result<Self> {
        let mut rows = rows;
        while rows.last().map(|r| r.is_zero()).unwrap_or(false) {
            rows.pop();
        }
        if rows.len() < 2 {
            return Err(Error::Invalid("P must have positive degree in Y".into()));
        }
        let def = AlgebraicSeriesDef { rows, y0 };
        // P(0, y0) = 0
        let p0: BigRational = def
            .rows
            .iter()
            .enumerate()
            .map(|(j, c)| c.coeff(0) * pow(&def.y0, j))
            .sum();
        if !p0.is_zero() {
            return Err(Error::InconsistentDefinition);
        }
        // dP/dY(0, y0) != 0
        let py0: BigRational = def
            .rows
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c.coeff(0) * BigRational::from_integer(j.into()) * pow(&def.y0, j - 1))
            .sum();
        if py0.is_zero() {
            return Err(Error::NotSimpleRoot);
        }
        // squarefree in Y: Res_Y(P, P_Y) not identically zero
        if def.singular_locus().is_zero() {
            return Err(Error::NotSquarefree);
        }
        Ok(def)
    }

    pub fn degree_y(&self) -> usize {
        self.rows.len() - 1
    }

    fn rows_dy(&self) -> Vec<UniPoly> {
        self.rows
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c.scale(&BigRational::from_integer(j.into())))
            .collect()
    }

    /// `Res_Y(P, dP/dY)` as a polynomial in X. Its roots collect both the
    /// discriminant locus and the vanishing locus of the leading coefficient.
    pub fn singular_locus(&self) -> UniPoly {
        let dy = self.rows_dy();
        resultant_y(&self.rows, &dy)
    }

    /// First `n+1` Taylor coefficients of the branch, by Newton iteration on
    /// truncations with doubling precision.
    pub fn coefficients_to(&self, n: usize) -> Vec<BigRational> {
        let target = n + 1;
        let mut y = vec![self.y0.clone()];
        let dy_rows = self.rows_dy();
        let mut order = 1usize;
        while order < target {
            order = (order * 2).min(target);
            let py = eval_rows(&dy_rows, &y, order);
            let p = eval_rows(&self.rows, &y, order);
            let inv = recip_trunc(&py, order);
            let corr = mul_trunc(&p, &inv, order);
            y = sub_series(&y, &corr, order);
        }
        y.resize(target, BigRational::zero());
        y
    }

    /// Residual `P(X, y(X)) mod X^(n+1)` for a given truncation of the branch.
    pub fn residual(&self, y: &[BigRational], n: usize) -> Vec<BigRational> {
        eval_rows(&self.rows, y, n + 1)
    }
}

fn pow(q: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= q;
    }
    acc
}

// ---- truncated univariate series arithmetic over the rationals ----

fn trunc(v: &mut Vec<BigRational>, order: usize) {
    v.truncate(order);
}

fn mul_trunc(a: &[BigRational], b: &[BigRational], order: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); order.min(a.len() + b.len()).max(1)];
    out.truncate(order);
    if out.is_empty() {
        return out;
    }
    for (i, x) in a.iter().enumerate() {
        if i >= order || x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= order {
                break;
            }
            out[i + j] += x * y;
        }
    }
    out
}

fn sub_series(a: &[BigRational], b: &[BigRational], order: usize) -> Vec<BigRational> {
    let n = a.len().max(b.len()).min(order);
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(k).cloned().unwrap_or_else(BigRational::zero);
            x - y
        })
        .collect()
}

/// Reciprocal of a unit series modulo X^order (triangular recurrence).
fn recip_trunc(a: &[BigRational], order: usize) -> Vec<BigRational> {
    assert!(!a.is_empty() && !a[0].is_zero(), "reciprocal of non-unit series");
    let a0inv = a[0].recip();
    let mut out = vec![BigRational::zero(); order];
    out[0] = a0inv.clone();
    for k in 1..order {
        let mut s = BigRational::zero();
        for j in 1..=k.min(a.len() - 1) {
            s += &a[j] * &out[k - j];
        }
        out[k] = -&a0inv * s;
    }
    out
}

/// Horner evaluation of sum_j rows[j](X) * y(X)^j modulo X^order.
fn eval_rows(rows: &[UniPoly], y: &[BigRational], order: usize) -> Vec<BigRational> {
    let mut acc: Vec<BigRational> = Vec::new();
    for row in rows.iter().rev() {
        let mut next = mul_trunc(&acc, y, order);
        for (k, c) in row.coeffs.iter().enumerate() {
            if k >= order {
                break;
            }
            if next.len() <= k {
                next.resize(k + 1, BigRational::zero());
            }
            next[k] += c;
        }
        trunc(&mut next, order);
        acc = next;
    }
    acc
}

// ---- resultants ----

/// Classical resultant of two univariate rational polynomials.
pub fn resultant(f: &UniPoly, g: &UniPoly) -> BigRational {
    let m = match f.degree() {
        None => return BigRational::zero(),
        Some(d) => d,
    };
    let n = match g.degree() {
        None => return BigRational::zero(),
        Some(d) => d,
    };
    if n == 0 {
        return pow(&g.coeff(0), m);
    }
    if m == 0 {
        return pow(&f.coeff(0), n);
    }
    let (_, r) = f.div_rem(g);
    let sign = if (m * n) % 2 == 1 { -BigRational::one() } else { BigRational::one() };
    match r.degree() {
        None => BigRational::zero(),
        Some(p) => {
            let lc = g.leading();
            sign * pow(&lc, m - p) * resultant(g, &r)
        }
    }
}

/// `Res_Y` of two polynomials in (X, Y) given as rows over X, computed by
/// evaluation at rational X-points and Lagrange interpolation.
fn resultant_y(f_rows: &[UniPoly], g_rows: &[UniPoly]) -> UniPoly {
    let degx_f: usize = f_rows.iter().filter_map(|r| r.degree()).max().unwrap_or(0);
    let degx_g: usize = g_rows.iter().filter_map(|r| r.degree()).max().unwrap_or(0);
    let degy_f = f_rows.len() - 1;
    let degy_g = g_rows.len() - 1;
    // deg_X Res <= degy_g * degx_f + degy_f * degx_g
    let bound = degy_g * degx_f + degy_f * degx_g;
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    let mut t: i64 = 0;
    while xs.len() <= bound {
        let x = BigRational::from_integer(BigInt::from(t));
        t = if t >= 0 { -(t + 1) } else { -t };
        // Degrees in Y must not drop at the sample point.
        let lf = f_rows.last().unwrap().eval(&x);
        let lg = g_rows.last().unwrap().eval(&x);
        if lf.is_zero() || lg.is_zero() {
            continue;
        }
        let fy = UniPoly::new(f_rows.iter().map(|r| r.eval(&x)).collect());
        let gy = UniPoly::new(g_rows.iter().map(|r| r.eval(&x)).collect());
        vals.push(resultant(&fy, &gy));
        xs.push(x);
    }
    lagrange_interpolate(&xs, &vals)
}

fn lagrange_interpolate(xs: &[BigRational], ys: &[BigRational]) -> UniPoly {
    let mut acc = UniPoly::zero();
    for (i, yi) in ys.iter().enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut li = UniPoly::constant(BigRational::one());
        let mut denom = BigRational::one();
        for (j, xj) in xs.iter().enumerate() {
            if i == j {
                continue;
            }
            li = li.mul(&UniPoly::new(vec![-xj, BigRational::one()]));
            denom *= &xs[i] - xj;
        }
        acc = acc.add(&li.scale(&(yi / denom)));
    }
    acc
}

// ---- radius and magnitude certification ----

/// Certified singularity distance: a rational lower bound on the minimum
/// modulus of the nonzero complex roots of `Res_Y(P, P_Y)`, or `None` when
/// that polynomial has no nonzero roots (no finite singular locus).
pub fn singularity_lower_bound(def: &AlgebraicSeriesDef) -> Result<Option<BigRational>> {
    let locus = def.singular_locus();
    if locus.is_zero() {
        return Err(Error::DegenerateDiscriminant);
    }
    let v = locus.valuation().unwrap_or(0);
    let q = locus.shift_down(v).squarefree_part();
    let d = match q.degree() {
        None | Some(0) => return Ok(None),
        Some(d) => d,
    };
    // R(u) = Res_X(q(X), X^d q(u/X)): its roots are pairwise products of the
    // roots of q, so the smallest positive real root is exactly the squared
    // minimum modulus. Sample u, take scalar Res_X, interpolate.
    let bound = d * d;
    let mut us = Vec::new();
    let mut vals = Vec::new();
    let mut t: i64 = 0;
    while us.len() <= bound {
        let u = BigRational::from_integer(BigInt::from(t));
        t = if t >= 0 { -(t + 1) } else { -t };
        let second = {
            // X^d q(u/X) evaluated at this u, as a polynomial in X
            let mut cs = vec![BigRational::zero(); d + 1];
            for (k, c) in cs.iter_mut().enumerate() {
                *c = q.coeff(d - k) * pow(&u, d - k);
            }
            UniPoly::new(cs)
        };
        if second.degree() != Some(d) {
            continue; // q(0) != 0 makes this unreachable, kept for safety
        }
        vals.push(resultant(&q, &second));
        us.push(u);
    }
    let r_poly = lagrange_interpolate(&us, &vals);
    let roots = sturm::isolate_real_roots(&r_poly)?;
    for iv in roots {
        // Find the smallest positive root and lower-bound it.
        let mut iv = iv;
        if iv.hi <= BigRational::zero() {
            continue;
        }
        if iv.width().is_zero() {
            if iv.lo.is_positive() {
                return Ok(Some(sqrt_lower(&iv.lo)));
            }
            continue;
        }
        // Shrink until the sign of the root is determined.
        let sf = r_poly.squarefree_part();
        let mut flo = sf.eval(&iv.lo);
        let two = BigRational::from_integer(2.into());
        let mut guard = 0;
        while iv.lo <= BigRational::zero() && guard < 512 {
            let mid = (&iv.lo + &iv.hi) / &two;
            let fmid = sf.eval(&mid);
            if fmid.is_zero() {
                iv.lo = mid.clone();
                iv.hi = mid;
                break;
            }
            if fmid.is_positive() == flo.is_positive() {
                iv.lo = mid;
                flo = fmid;
            } else {
                iv.hi = mid;
            }
            guard += 1;
        }
        if iv.lo.is_positive() {
            return Ok(Some(sqrt_lower(&iv.lo)));
        }
        // Root is negative or zero; move on.
    }
    Ok(None)
}

/// Lagrange-style magnitude bound: every branch of `P(X, Y) = 0` satisfies
/// `|Y| <= max(1, sum_k B_k / L)` on the closed disc `|X| <= rho`, where the
/// `B_k` bound the non-leading rows and `L` lower-bounds the leading row.
/// Requires `rho` strictly below the singularity distance and a leading row
/// not vanishing at the origin.
pub fn magnitude_bound(
    def: &AlgebraicSeriesDef,
    rho: &BigRational,
    beta: Option<&BigRational>,
) -> Result<BigRational> {
    let lead = def.rows.last().unwrap();
    let lead0 = lead.coeff(0).abs();
    if lead0.is_zero() {
        return Err(Error::Invalid("leading row vanishes at the origin".into()));
    }
    let deg_lead = lead.degree().unwrap_or(0);
    let lower = match beta {
        None => {
            // No finite singular locus: the leading row must be constant.
            lead0.clone()
        }
        Some(b) => {
            if rho >= b {
                return Err(Error::MajorantUnavailable);
            }
            let shrink = BigRational::one() - rho / b;
            lead0.clone() * pow(&shrink, deg_lead)
        }
    };
    let mut sum = BigRational::zero();
    for row in def.rows.iter().take(def.rows.len() - 1) {
        sum += row.sup_bound_on_disc(rho);
    }
    let ratio = sum / lower;
    Ok(if ratio > BigRational::one() { ratio } else { BigRational::one() })
}

/// Canonical `(M, r)` certificate for an algebraic leaf: `r` is half the
/// certified singularity distance (capped at 2) and `M` bounds every branch
/// on the closed disc of radius `r`, so `|a_p| <= M r^-p` for all `p`.
pub fn radius_bound(def: &AlgebraicSeriesDef) -> Result<(BigRational, BigRational)> {
    let beta = singularity_lower_bound(def)?;
    let two = BigRational::from_integer(2.into());
    let r = match &beta {
        None => two.clone(),
        Some(b) => {
            let half = b / &two;
            if half > two {
                two.clone()
            } else {
                half
            }
        }
    };
    let m = magnitude_bound(def, &r, beta.as_ref())?;
    Ok((m, r))
}

/// Goal-directed variant: certify `(M, rho)` for a caller-chosen radius.
/// Succeeds for any `rho` strictly below the singularity distance (when the
/// leading row is a unit at the origin).
pub fn magnitude_at(def: &AlgebraicSeriesDef, rho: &BigRational) -> Result<(BigRational, BigRational)> {
    let beta = singularity_lower_bound(def)?;
    if let Some(b) = &beta {
        if rho >= b {
            return Err(Error::MajorantUnavailable);
        }
    }
    let m = magnitude_bound(def, rho, beta.as_ref())?;
    Ok((m, rho.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_i64, rat_int};

    fn geometric_def() -> AlgebraicSeriesDef {
        // P = (1 - X) Y - 1
        AlgebraicSeriesDef::new(
            vec![UniPoly::from_ints(&[-1]), UniPoly::from_ints(&[1, -1])],
            rat_int(1),
        )
        .unwrap()
    }

    #[test]
    fn geometric_series_coefficients() {
        let def = geometric_def();
        let cs = def.coefficients_to(8);
        for c in cs {
            assert_eq!(c, rat_int(1));
        }
    }

    #[test]
    fn inverse_sqrt_coefficients() {
        // P = Y^2 (1 - X^2) - 1, y0 = 1: the binomial series (1-X^2)^(-1/2)
        let def = AlgebraicSeriesDef::new(
            vec![
                UniPoly::from_ints(&[-1]),
                UniPoly::zero(),
                UniPoly::from_ints(&[1, 0, -1]),
            ],
            rat_int(1),
        )
        .unwrap();
        let cs = def.coefficients_to(4);
        // Brute-force oracle: iterate y <- y - (y^2(1-x^2)-1)/(2y(1-x^2)) symbolically
        // gives 1 + x^2/2 + 3x^4/8 + ...
        assert_eq!(cs[0], rat_int(1));
        assert_eq!(cs[1], rat_int(0));
        assert_eq!(cs[2], rat_i64(1, 2));
        assert_eq!(cs[3], rat_int(0));
        assert_eq!(cs[4], rat_i64(3, 8));
    }

    #[test]
    fn sqrt_one_plus_x_coefficients() {
        // P = Y^2 - (1 + X), y0 = 1
        let def = AlgebraicSeriesDef::new(
            vec![UniPoly::from_ints(&[-1, -1]), UniPoly::zero(), UniPoly::from_ints(&[1])],
            rat_int(1),
        )
        .unwrap();
        let cs = def.coefficients_to(3);
        assert_eq!(cs[0], rat_int(1));
        assert_eq!(cs[1], rat_i64(1, 2));
        assert_eq!(cs[2], rat_i64(-1, 8));
        assert_eq!(cs[3], rat_i64(1, 16));
    }

    #[test]
    fn newton_quadratic_progress() {
        // After lifting to order 2^k the residual vanishes at least to 2^k.
        let def = AlgebraicSeriesDef::new(
            vec![UniPoly::from_ints(&[-1, -1]), UniPoly::zero(), UniPoly::from_ints(&[1])],
            rat_int(1),
        )
        .unwrap();
        for k in 1..=4usize {
            let order = 1 << k;
            let y = def.coefficients_to(order - 1);
            let res = def.residual(&y, order - 1);
            assert!(res.iter().all(|c| c.is_zero()), "residual nonzero at order {}", order);
        }
    }

    #[test]
    fn validation_errors() {
        // P(0, y0) != 0
        assert_eq!(
            AlgebraicSeriesDef::new(
                vec![UniPoly::from_ints(&[1]), UniPoly::from_ints(&[1])],
                rat_int(1),
            )
            .unwrap_err(),
            Error::InconsistentDefinition
        );
        // double root: P = Y^2, y0 = 0
        assert_eq!(
            AlgebraicSeriesDef::new(
                vec![UniPoly::zero(), UniPoly::zero(), UniPoly::from_ints(&[1])],
                rat_int(0),
            )
            .unwrap_err(),
            Error::NotSimpleRoot
        );
    }

    #[test]
    fn resultant_matches_root_products() {
        // res(x-2, x-5) = 2 - 5... up to sign convention: lc(f)^deg(g) * prod g(roots of f)
        let f = UniPoly::from_ints(&[-2, 1]);
        let g = UniPoly::from_ints(&[-5, 1]);
        let r = resultant(&f, &g);
        assert_eq!(r.abs(), rat_int(3));
        // res((x-1)(x-2), x) = product of x evaluated at roots = 2
        let f = UniPoly::from_ints(&[2, -3, 1]);
        let g = UniPoly::x();
        assert_eq!(resultant(&f, &g).abs(), rat_int(2));
    }

    #[test]
    fn radius_bound_geometric() {
        let def = geometric_def();
        let (m, r) = radius_bound(&def).unwrap();
        assert!(r <= rat_i64(1, 2));
        assert_eq!(r, rat_i64(1, 2));
        assert_eq!(m, rat_int(2));
        // validity: coefficients are all 1, so need 1 <= M r^-p.
        let cs = def.coefficients_to(64);
        let mut bound = m.clone();
        for c in cs {
            assert!(c.abs() <= bound);
            bound = bound / &r;
        }
    }

    #[test]
    fn radius_bound_branch_point() {
        // P = Y^2 - (1 + X): branch point at X = -1
        let def = AlgebraicSeriesDef::new(
            vec![UniPoly::from_ints(&[-1, -1]), UniPoly::zero(), UniPoly::from_ints(&[1])],
            rat_int(1),
        )
        .unwrap();
        let (m, r) = radius_bound(&def).unwrap();
        assert_eq!(r, rat_i64(1, 2));
        let cs = def.coefficients_to(64);
        let mut bound = m.clone();
        for c in cs {
            assert!(c.abs() <= bound);
            bound = bound / &r;
        }
    }

    #[test]
    fn radius_bound_polynomial_series() {
        // P = Y - (3 + X^2): entire, radius capped at 2
        let def = AlgebraicSeriesDef::new(
            vec![UniPoly::from_ints(&[-3, 0, -1]), UniPoly::from_ints(&[1])],
            rat_int(3),
        )
        .unwrap();
        let (_, r) = radius_bound(&def).unwrap();
        assert_eq!(r, rat_int(2));
    }

    #[test]
    fn goal_directed_magnitude() {
        let def = geometric_def();
        // radius 3/4 still strictly inside the singularity distance 1
        let (m, r) = magnitude_at(&def, &rat_i64(3, 4)).unwrap();
        assert_eq!(r, rat_i64(3, 4));
        let cs = def.coefficients_to(48);
        let mut bound = m.clone();
        for c in cs {
            assert!(c.abs() <= bound);
            bound = bound / &r;
        }
        // beyond the singularity it must fail
        assert!(magnitude_at(&def, &rat_i64(3, 2)).is_err());
    }
}
