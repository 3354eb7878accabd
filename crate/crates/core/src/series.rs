use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, RwLock};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebraic::AlgebraicSeriesDef;
use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::poly::MultiPoly;
use crate::rational::{bits_for_tolerance, binomial, pow10_neg, rat_int};
use crate::truncated::TruncatedSeries;
use crate::tseries::{self, CoeffMap, USeries};

/// Default coefficient tolerance: matches thirty decimal digits.
pub fn default_tolerance() -> BigRational {
    pow10_neg(30)
}

/// Node kinds of the derivation DAG. Each constructor on [`SeriesExpr`]
/// validates its preconditions; the coefficient contracts live in
/// `coeff_ctx` below.
#[derive(Debug)]
pub enum NodeKind {
    Poly(MultiPoly),
    Alg(AlgebraicSeriesDef),
    Add(SeriesExpr, SeriesExpr),
    Mul(SeriesExpr, SeriesExpr),
    Recip(SeriesExpr),
    SubstPoly(SeriesExpr, Vec<MultiPoly>),
    ComposeSeries(SeriesExpr, Vec<SeriesExpr>),
    Translate(SeriesExpr, Vec<BigRational>),
    Antider(SeriesExpr, usize),
    Deriv(SeriesExpr, usize),
    Restrict0(SeriesExpr, usize),
    Permute(SeriesExpr, Vec<usize>),
    Inverse(SeriesExpr),
    Implicit { system: Vec<SeriesExpr>, index: usize },
    Re(SeriesExpr),
    Im(SeriesExpr),
}

#[derive(Debug, Default)]
struct Memo {
    /// Working precision (bits) the certified entries were computed at.
    prec: u64,
    /// Total degree up to which window-style engines have filled the map.
    filled_to: i64,
    map: CoeffMap,
}

#[derive(Debug)]
pub(crate) struct Node {
    arity: usize,
    kind: NodeKind,
    /// No Translate node in the subtree: all coefficients stay exact.
    exact: bool,
    memo: RwLock<Memo>,
    pub(crate) majorant_cache: RwLock<crate::majorant::MajorantCache>,
}

/// An immutable derivation DAG handle; clones share structure and memo tables.
#[derive(Debug, Clone)]
pub struct SeriesExpr {
    pub(crate) node: Arc<Node>,
}

pub(crate) struct Ctx {
    pub prec: u64,
}

impl SeriesExpr {
    fn make(arity: usize, kind: NodeKind) -> SeriesExpr {
        let exact = match &kind {
            NodeKind::Translate(..) => false,
            NodeKind::Poly(_) | NodeKind::Alg(_) => true,
            NodeKind::Add(a, b) | NodeKind::Mul(a, b) => a.is_exact() && b.is_exact(),
            NodeKind::Recip(e)
            | NodeKind::SubstPoly(e, _)
            | NodeKind::Antider(e, _)
            | NodeKind::Deriv(e, _)
            | NodeKind::Restrict0(e, _)
            | NodeKind::Permute(e, _)
            | NodeKind::Inverse(e)
            | NodeKind::Re(e)
            | NodeKind::Im(e) => e.is_exact(),
            NodeKind::ComposeSeries(e, gs) => {
                e.is_exact() && gs.iter().all(|g| g.is_exact())
            }
            NodeKind::Implicit { system, .. } => system.iter().all(|g| g.is_exact()),
        };
        SeriesExpr {
            node: Arc::new(Node {
                arity,
                kind,
                exact,
                memo: RwLock::new(Memo { prec: 0, filled_to: -1, map: CoeffMap::new() }),
                majorant_cache: RwLock::new(Default::default()),
            }),
        }
    }

    pub fn arity(&self) -> usize {
        self.node.arity
    }

    pub fn kind(&self) -> &NodeKind {
        &self.node.kind
    }

    /// True when no translation occurs in the derivation: every coefficient
    /// is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.node.exact
    }

    pub(crate) fn children(&self) -> Vec<SeriesExpr> {
        match &self.node.kind {
            NodeKind::Poly(_) | NodeKind::Alg(_) => vec![],
            NodeKind::Add(a, b) | NodeKind::Mul(a, b) => vec![a.clone(), b.clone()],
            NodeKind::Recip(e)
            | NodeKind::SubstPoly(e, _)
            | NodeKind::Translate(e, _)
            | NodeKind::Antider(e, _)
            | NodeKind::Deriv(e, _)
            | NodeKind::Restrict0(e, _)
            | NodeKind::Permute(e, _)
            | NodeKind::Inverse(e)
            | NodeKind::Re(e)
            | NodeKind::Im(e) => vec![e.clone()],
            NodeKind::ComposeSeries(e, gs) => {
                let mut v = vec![e.clone()];
                v.extend(gs.iter().cloned());
                v
            }
            NodeKind::Implicit { system, .. } => system.clone(),
        }
    }

    // ---- constructors ----

    pub fn poly(p: MultiPoly) -> SeriesExpr {
        let arity = p.arity;
        SeriesExpr::make(arity, NodeKind::Poly(p))
    }

    pub fn constant(arity: usize, c: BigRational) -> SeriesExpr {
        SeriesExpr::poly(MultiPoly::constant(arity, c))
    }

    pub fn alg(def: AlgebraicSeriesDef) -> SeriesExpr {
        SeriesExpr::make(1, NodeKind::Alg(def))
    }

    pub fn add(a: &SeriesExpr, b: &SeriesExpr) -> Result<SeriesExpr> {
        if a.arity() != b.arity() {
            return Err(Error::ArityMismatch { expected: a.arity(), got: b.arity() });
        }
        Ok(SeriesExpr::make(a.arity(), NodeKind::Add(a.clone(), b.clone())))
    }

    pub fn mul(a: &SeriesExpr, b: &SeriesExpr) -> Result<SeriesExpr> {
        if a.arity() != b.arity() {
            return Err(Error::ArityMismatch { expected: a.arity(), got: b.arity() });
        }
        Ok(SeriesExpr::make(a.arity(), NodeKind::Mul(a.clone(), b.clone())))
    }

    pub fn scale(c: BigRational, e: &SeriesExpr) -> SeriesExpr {
        let k = SeriesExpr::constant(e.arity(), c);
        SeriesExpr::mul(&k, e).expect("same arity by construction")
    }

    pub fn neg(e: &SeriesExpr) -> SeriesExpr {
        SeriesExpr::scale(-BigRational::one(), e)
    }

    pub fn sub(a: &SeriesExpr, b: &SeriesExpr) -> Result<SeriesExpr> {
        SeriesExpr::add(a, &SeriesExpr::neg(b))
    }

    /// Reciprocal; the constant term must be provably nonzero (an exact
    /// nonzero rational, or an enclosure excluding zero after tightening).
    pub fn recip(e: &SeriesExpr) -> Result<SeriesExpr> {
        let c0 = e.coeff(&MultiIndex::zero(e.arity()))?;
        if !c0.is_provably_nonzero() {
            // Tighten before giving up.
            let mut ok = false;
            if !e.is_exact() {
                for extra in [60u32, 120, 240] {
                    let c = e.coeff_with_tol(&MultiIndex::zero(e.arity()), &pow10_neg(extra))?;
                    if c.is_provably_nonzero() {
                        ok = true;
                        break;
                    }
                }
            }
            if !ok {
                return Err(Error::NonUnitReciprocal);
            }
        }
        Ok(SeriesExpr::make(e.arity(), NodeKind::Recip(e.clone())))
    }

    /// Substitute rational polynomials vanishing at the origin for the
    /// variables. The substituted polynomials fix the new arity.
    pub fn subst_poly(e: &SeriesExpr, h: Vec<MultiPoly>) -> Result<SeriesExpr> {
        if h.len() != e.arity() {
            return Err(Error::ArityMismatch { expected: e.arity(), got: h.len() });
        }
        if h.is_empty() {
            return Err(Error::Invalid("substitution into a 0-ary series".into()));
        }
        let m = h[0].arity;
        for hj in &h {
            if hj.arity != m {
                return Err(Error::ArityMismatch { expected: m, got: hj.arity });
            }
            if !hj.constant_term().is_zero() {
                return Err(Error::NonvanishingSubstitution);
            }
        }
        Ok(SeriesExpr::make(m, NodeKind::SubstPoly(e.clone(), h)))
    }

    /// Re-expand at a rational interior point. Requires a certified majorant
    /// of the child whose radii dominate the translation margin.
    pub fn translate(e: &SeriesExpr, a: Vec<BigRational>) -> Result<SeriesExpr> {
        if a.len() != e.arity() {
            return Err(Error::ArityMismatch { expected: e.arity(), got: a.len() });
        }
        if a.iter().all(|ai| ai.is_zero()) {
            return Ok(SeriesExpr::make(e.arity(), NodeKind::Translate(e.clone(), a)));
        }
        let goal = crate::majorant::translation_goal(&a);
        crate::majorant::majorant_at_least(e, Some(&goal))
            .map_err(|_| Error::TranslationOutsideDomain)?;
        Ok(SeriesExpr::make(e.arity(), NodeKind::Translate(e.clone(), a)))
    }

    /// Formal antiderivative in variable `i` (1-based).
    pub fn antider(e: &SeriesExpr, i: usize) -> Result<SeriesExpr> {
        check_var(e, i)?;
        Ok(SeriesExpr::make(e.arity(), NodeKind::Antider(e.clone(), i - 1)))
    }

    /// Formal derivative in variable `i` (1-based).
    pub fn deriv(e: &SeriesExpr, i: usize) -> Result<SeriesExpr> {
        check_var(e, i)?;
        Ok(SeriesExpr::make(e.arity(), NodeKind::Deriv(e.clone(), i - 1)))
    }

    /// Set variable `i` (1-based) to zero, dropping the arity by one.
    pub fn restrict0(e: &SeriesExpr, i: usize) -> Result<SeriesExpr> {
        check_var(e, i)?;
        Ok(SeriesExpr::make(e.arity() - 1, NodeKind::Restrict0(e.clone(), i - 1)))
    }

    /// Permute variables: `sigma` is 1-based, `sigma[i-1] = j` meaning the new
    /// variable `i` reads the old variable `j`.
    pub fn permute(e: &SeriesExpr, sigma: Vec<usize>) -> Result<SeriesExpr> {
        let n = e.arity();
        if sigma.len() != n {
            return Err(Error::BadPermutation);
        }
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s == 0 || s > n || seen[s - 1] {
                return Err(Error::BadPermutation);
            }
            seen[s - 1] = true;
        }
        let zero_based = sigma.iter().map(|&s| s - 1).collect();
        Ok(SeriesExpr::make(n, NodeKind::Permute(e.clone(), zero_based)))
    }

    /// Formal composition with zero-constant-term series.
    pub fn compose(e: &SeriesExpr, gs: Vec<SeriesExpr>) -> Result<SeriesExpr> {
        if gs.len() != e.arity() {
            return Err(Error::ArityMismatch { expected: e.arity(), got: gs.len() });
        }
        if gs.is_empty() {
            return Err(Error::Invalid("composition into a 0-ary series".into()));
        }
        let m = gs[0].arity();
        for g in &gs {
            if g.arity() != m {
                return Err(Error::ArityMismatch { expected: m, got: g.arity() });
            }
            let c0 = g.coeff(&MultiIndex::zero(m))?;
            if !c0.is_provably_zero() {
                return Err(Error::NonvanishingSubstitution);
            }
        }
        Ok(SeriesExpr::make(m, NodeKind::ComposeSeries(e.clone(), gs)))
    }

    /// Compositional inverse of a univariate series with `f(0) = 0` and
    /// `f'(0) != 0`.
    pub fn inverse(e: &SeriesExpr) -> Result<SeriesExpr> {
        if e.arity() != 1 {
            return Err(Error::ArityMismatch { expected: 1, got: e.arity() });
        }
        let c0 = e.coeff(&MultiIndex(vec![0]))?;
        let c1 = e.coeff(&MultiIndex(vec![1]))?;
        if !c0.is_provably_zero() || !c1.is_provably_nonzero() {
            return Err(Error::NotInvertible);
        }
        Ok(SeriesExpr::make(1, NodeKind::Inverse(e.clone())))
    }

    /// Implicit solutions `g(0) = 0`, `F(X, g(X)) = 0` of a system of `l`
    /// series in `n + l` variables: returns the `l` solution components.
    pub fn implicit(system: Vec<SeriesExpr>) -> Result<Vec<SeriesExpr>> {
        let l = system.len();
        if l == 0 {
            return Err(Error::Invalid("empty implicit system".into()));
        }
        let total = system[0].arity();
        if total < l + 1 {
            return Err(Error::Invalid("implicit system needs at least one free variable".into()));
        }
        let n = total - l;
        for f in &system {
            if f.arity() != total {
                return Err(Error::ArityMismatch { expected: total, got: f.arity() });
            }
            let c0 = f.coeff(&MultiIndex::zero(total))?;
            if !c0.is_provably_zero() {
                return Err(Error::Invalid("implicit system must vanish at the origin".into()));
            }
        }
        // Jacobian in the trailing l variables at the origin must be provably
        // invertible: exact rational determinant, or an enclosure excluding 0.
        let mut jac = Vec::new();
        for f in &system {
            let mut row = Vec::new();
            for j in 0..l {
                row.push(f.coeff(&MultiIndex::unit(total, n + j))?);
            }
            jac.push(row);
        }
        let det = det_coeff(&jac);
        if !det.is_provably_nonzero() {
            return Err(Error::SingularJacobian);
        }
        Ok((0..l)
            .map(|index| {
                SeriesExpr::make(n, NodeKind::Implicit { system: system.clone(), index })
            })
            .collect())
    }

    /// Real and imaginary parts of the complexification: arity doubles, with
    /// the interleaved layout `(x_1, y_1, ..., x_n, y_n)`.
    pub fn complexify(e: &SeriesExpr) -> (SeriesExpr, SeriesExpr) {
        let n2 = e.arity() * 2;
        (
            SeriesExpr::make(n2, NodeKind::Re(e.clone())),
            SeriesExpr::make(n2, NodeKind::Im(e.clone())),
        )
    }

    // ---- coefficient extraction ----

    /// Coefficient at `alpha` with the default tolerance for certified values.
    pub fn coeff(&self, alpha: &MultiIndex) -> Result<Coefficient> {
        self.coeff_with_tol(alpha, &default_tolerance())
    }

    /// Coefficient at `alpha`; certified values come back with enclosure
    /// radius at most `tol`.
    pub fn coeff_with_tol(&self, alpha: &MultiIndex, tol: &BigRational) -> Result<Coefficient> {
        if alpha.len() != self.arity() {
            return Err(Error::BadIndex { index: alpha.clone(), arity: self.arity() });
        }
        if !tol.is_positive() {
            return Err(Error::Invalid("tolerance must be positive".into()));
        }
        let mut prec = bits_for_tolerance(tol) + 32;
        loop {
            let c = self.coeff_ctx(alpha, &Ctx { prec })?;
            match &c {
                Coefficient::Exact(_) => return Ok(c),
                Coefficient::Certified(b) => {
                    if b.rad_rational() <= *tol {
                        return Ok(c);
                    }
                }
            }
            prec *= 2;
            if prec > 1 << 22 {
                return Err(Error::Invalid("tolerance unattainable".into()));
            }
        }
    }

    /// All coefficients of total degree at most `n`.
    pub fn truncate(&self, n: u32) -> Result<TruncatedSeries> {
        self.truncate_with_tol(n, &default_tolerance())
    }

    pub fn truncate_with_tol(&self, n: u32, tol: &BigRational) -> Result<TruncatedSeries> {
        let mut coeffs = BTreeMap::new();
        for alpha in MultiIndex::all_up_to(self.arity(), n) {
            let c = self.coeff_with_tol(&alpha, tol)?;
            coeffs.insert(alpha, c);
        }
        Ok(TruncatedSeries { arity: self.arity(), order: n, coeffs })
    }

    pub(crate) fn coeff_ctx(&self, alpha: &MultiIndex, ctx: &Ctx) -> Result<Coefficient> {
        debug_assert_eq!(alpha.len(), self.arity());
        match &self.node.kind {
            NodeKind::Poly(p) => Ok(Coefficient::Exact(p.coeff(alpha))),
            NodeKind::Add(a, b) => {
                Ok(a.coeff_ctx(alpha, ctx)?.add(&b.coeff_ctx(alpha, ctx)?, ctx.prec))
            }
            NodeKind::Antider(e, i) => match alpha.lowered(*i) {
                None => Ok(Coefficient::zero()),
                Some(beta) => {
                    let denom = rat_int(alpha.get(*i) as i64);
                    Ok(e.coeff_ctx(&beta, ctx)?.mul_rational(&denom.recip(), ctx.prec))
                }
            },
            NodeKind::Deriv(e, i) => {
                let beta = alpha.bumped(*i);
                let factor = rat_int(alpha.get(*i) as i64 + 1);
                Ok(e.coeff_ctx(&beta, ctx)?.mul_rational(&factor, ctx.prec))
            }
            NodeKind::Restrict0(e, i) => e.coeff_ctx(&alpha.inserted(*i, 0), ctx),
            NodeKind::Permute(e, sigma) => {
                let beta = MultiIndex(sigma.iter().map(|&s| alpha.get(s)).collect());
                e.coeff_ctx(&beta, ctx)
            }
            NodeKind::Re(e) => complex_part(e, alpha, ctx, false),
            NodeKind::Im(e) => complex_part(e, alpha, ctx, true),
            NodeKind::Translate(e, a) => self.translate_memo(e, a, alpha, ctx),
            NodeKind::Alg(_)
            | NodeKind::Mul(..)
            | NodeKind::Recip(_)
            | NodeKind::SubstPoly(..)
            | NodeKind::ComposeSeries(..)
            | NodeKind::Inverse(_)
            | NodeKind::Implicit { .. } => {
                self.ensure_window(alpha.degree(), ctx)?;
                let memo = self.node.memo.read().unwrap();
                Ok(tseries::map_get(&memo.map, alpha))
            }
        }
    }

    fn translate_memo(
        &self,
        child: &SeriesExpr,
        a: &[BigRational],
        alpha: &MultiIndex,
        ctx: &Ctx,
    ) -> Result<Coefficient> {
        {
            let memo = self.node.memo.read().unwrap();
            if memo.prec >= ctx.prec {
                if let Some(c) = memo.map.get(alpha) {
                    return Ok(c.clone());
                }
            }
        }
        let ball = crate::eval::translate_coefficient_ctx(child, a, alpha, ctx.prec)?;
        let c = Coefficient::Certified(ball);
        let mut memo = self.node.memo.write().unwrap();
        if memo.prec < ctx.prec {
            memo.map.clear();
            memo.prec = ctx.prec;
            memo.filled_to = -1;
        }
        if memo.prec == ctx.prec {
            memo.map.insert(alpha.clone(), c.clone());
        }
        Ok(c)
    }

    /// Fill the window cache of an engine node up to total degree `order`.
    fn ensure_window(&self, order: u32, ctx: &Ctx) -> Result<()> {
        {
            let memo = self.node.memo.read().unwrap();
            let prec_ok = self.node.exact || memo.prec >= ctx.prec;
            if prec_ok && memo.filled_to >= order as i64 {
                return Ok(());
            }
        }
        let mut memo = self.node.memo.write().unwrap();
        let prec_ok = self.node.exact || memo.prec >= ctx.prec;
        if prec_ok && memo.filled_to >= order as i64 {
            return Ok(());
        }
        if !prec_ok {
            memo.map.clear();
            memo.filled_to = -1;
        }
        memo.prec = memo.prec.max(ctx.prec);
        let prec = memo.prec;
        let map = self.compute_window(order, &Ctx { prec })?;
        memo.map = map;
        memo.filled_to = order as i64;
        Ok(())
    }

    fn compute_window(&self, order: u32, ctx: &Ctx) -> Result<CoeffMap> {
        let arity = self.arity();
        match &self.node.kind {
            NodeKind::Alg(def) => {
                let cs = def.coefficients_to(order as usize);
                let mut map = CoeffMap::new();
                for (k, c) in cs.into_iter().enumerate() {
                    if !c.is_zero() {
                        map.insert(MultiIndex(vec![k as u32]), Coefficient::Exact(c));
                    }
                }
                Ok(map)
            }
            NodeKind::Mul(a, b) => {
                let wa = child_window(a, order, ctx)?;
                let wb = child_window(b, order, ctx)?;
                Ok(tseries::map_mul_trunc(&wa, &wb, order, ctx.prec))
            }
            NodeKind::Recip(e) => {
                let we = child_window(e, order, ctx)?;
                tseries::map_recip_trunc(&we, arity, order, ctx.prec)
            }
            NodeKind::SubstPoly(e, h) => {
                let we = child_window(e, order, ctx)?;
                let args: Vec<CoeffMap> = h
                    .iter()
                    .map(|p| {
                        p.terms
                            .iter()
                            .map(|(m, c)| (m.clone(), Coefficient::Exact(c.clone())))
                            .collect()
                    })
                    .collect();
                Ok(tseries::compose_maps(&we, e.arity(), &args, arity, order, ctx.prec))
            }
            NodeKind::ComposeSeries(e, gs) => {
                let we = child_window(e, order, ctx)?;
                let args: Vec<CoeffMap> = gs
                    .iter()
                    .map(|g| child_window(g, order, ctx))
                    .collect::<Result<_>>()?;
                Ok(tseries::compose_maps(&we, e.arity(), &args, arity, order, ctx.prec))
            }
            NodeKind::Inverse(e) => {
                let g = inverse_window(e, order, ctx)?;
                let mut map = CoeffMap::new();
                for (k, c) in g.0.into_iter().enumerate() {
                    if !c.is_provably_zero() {
                        map.insert(MultiIndex(vec![k as u32]), c);
                    }
                }
                Ok(map)
            }
            NodeKind::Implicit { system, index } => {
                let sols = implicit_window(system, order, ctx)?;
                Ok(sols[*index].clone())
            }
            _ => unreachable!("not a window engine"),
        }
    }
}

fn check_var(e: &SeriesExpr, i: usize) -> Result<()> {
    if e.arity() == 0 || i == 0 || i > e.arity() {
        return Err(Error::ArityMismatch { expected: e.arity(), got: i });
    }
    Ok(())
}

fn child_window(e: &SeriesExpr, order: u32, ctx: &Ctx) -> Result<CoeffMap> {
    let mut map = CoeffMap::new();
    for alpha in MultiIndex::all_up_to(e.arity(), order) {
        let c = e.coeff_ctx(&alpha, ctx)?;
        if !c.is_provably_zero() {
            map.insert(alpha, c);
        }
    }
    Ok(map)
}

/// Coefficient of `Re f_C` / `Im f_C` at the interleaved index
/// `(beta_1, gamma_1, ..., beta_n, gamma_n)`: expansion of
/// `prod_j (x_j + i y_j)^{alpha_j}` with `alpha = beta + gamma`.
fn complex_part(e: &SeriesExpr, delta: &MultiIndex, ctx: &Ctx, imaginary: bool) -> Result<Coefficient> {
    let n = e.arity();
    let mut alpha = Vec::with_capacity(n);
    let mut gamma_total: u64 = 0;
    let mut factor = BigRational::one();
    for j in 0..n {
        let beta_j = delta.get(2 * j);
        let gamma_j = delta.get(2 * j + 1);
        alpha.push(beta_j + gamma_j);
        gamma_total += gamma_j as u64;
        factor *= binomial((beta_j + gamma_j) as u64, gamma_j as u64);
    }
    // i^{|gamma|}: real part cycles +1, 0, -1, 0; imaginary 0, +1, 0, -1.
    let phase: i64 = match (gamma_total % 4, imaginary) {
        (0, false) => 1,
        (2, false) => -1,
        (1, true) => 1,
        (3, true) => -1,
        _ => 0,
    };
    if phase == 0 {
        return Ok(Coefficient::zero());
    }
    let c = e.coeff_ctx(&MultiIndex(alpha), ctx)?;
    Ok(c.mul_rational(&(factor * rat_int(phase)), ctx.prec))
}

/// Determinant of a small matrix of coefficients (interval-aware).
fn det_coeff(m: &[Vec<Coefficient>]) -> Coefficient {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Coefficient::zero();
    for (j, pivot) in m[0].iter().enumerate() {
        let minor: Vec<Vec<Coefficient>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, c)| c.clone())
                    .collect()
            })
            .collect();
        let mut term = pivot.mul(&det_coeff(&minor), 128);
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = acc.add(&term, 128);
    }
    acc
}

/// Newton iteration for the compositional inverse on truncations, doubling
/// the order each round.
fn inverse_window(f: &SeriesExpr, order: u32, ctx: &Ctx) -> Result<USeries> {
    let order = order as usize;
    let c1 = f.coeff_ctx(&MultiIndex(vec![1]), ctx)?;
    let c1_inv = c1.recip(ctx.prec)?;
    let mut g = USeries(vec![Coefficient::zero(), c1_inv]);
    if order == 0 {
        return Ok(USeries(vec![Coefficient::zero()]));
    }
    let mut m = 1usize;
    // f's coefficients up to the final order, fetched once.
    let f_coeffs: Vec<Coefficient> = (0..=order)
        .map(|k| f.coeff_ctx(&MultiIndex(vec![k as u32]), ctx))
        .collect::<Result<_>>()?;
    let fprime: Vec<Coefficient> = (0..order)
        .map(|k| f_coeffs[k + 1].mul_rational(&rat_int(k as i64 + 1), ctx.prec))
        .collect();
    while m < order {
        m = (2 * m).min(order);
        // g <- g - (f(g) - X) / f'(g) mod X^{m+1}
        let fog = USeries::compose_trunc(&f_coeffs[..=m], &g, m, ctx.prec);
        let num = fog.sub(&USeries::identity(m), ctx.prec);
        let den = USeries::compose_trunc(&fprime[..m.min(fprime.len())], &g, m, ctx.prec);
        let den_inv = den.recip_trunc(m, ctx.prec)?;
        let corr = num.mul_trunc(&den_inv, m, ctx.prec);
        g = g.sub(&corr, ctx.prec).truncated(m);
    }
    g.0.resize(order + 1, Coefficient::zero());
    Ok(g)
}

/// Modified Newton (constant Jacobian) for implicit systems on truncations:
/// each pass gains at least one order.
fn implicit_window(system: &[SeriesExpr], order: u32, ctx: &Ctx) -> Result<Vec<CoeffMap>> {
    let l = system.len();
    let total = system[0].arity();
    let n = total - l;
    // Exact inverse Jacobian at the origin.
    let mut jac = Vec::new();
    for f in system {
        let mut row = Vec::new();
        for j in 0..l {
            row.push(f.coeff_ctx(&MultiIndex::unit(total, n + j), ctx)?);
        }
        jac.push(row);
    }
    let jinv = invert_matrix(&jac, ctx.prec)?;
    // Windows of the system members.
    let f_windows: Vec<CoeffMap> =
        system.iter().map(|f| child_window(f, order, ctx)).collect::<Result<_>>()?;
    // Coordinate argument maps for the first n slots.
    let coord: Vec<CoeffMap> = (0..n)
        .map(|i| {
            let mut m = CoeffMap::new();
            m.insert(MultiIndex::unit(n, i), Coefficient::Exact(BigRational::one()));
            m
        })
        .collect();
    let mut g: Vec<CoeffMap> = vec![CoeffMap::new(); l];
    for _pass in 0..=order {
        // residual_i = F_i(X, g)
        let mut args = coord.clone();
        args.extend(g.iter().cloned());
        let mut residual = Vec::with_capacity(l);
        for fw in &f_windows {
            residual.push(tseries::compose_maps(fw, total, &args, n, order, ctx.prec));
        }
        // g <- g - Jinv * residual
        let mut changed = false;
        for i in 0..l {
            let mut corr = CoeffMap::new();
            for (j, r) in residual.iter().enumerate() {
                for (m, c) in r {
                    tseries::map_add_into(
                        &mut corr,
                        m.clone(),
                        c.mul(&jinv[i][j], ctx.prec),
                        ctx.prec,
                    );
                }
            }
            if !corr.is_empty() {
                changed = true;
            }
            g[i] = tseries::map_sub(&g[i], &corr, ctx.prec);
        }
        if !changed {
            break;
        }
    }
    Ok(g)
}

fn invert_matrix(m: &[Vec<Coefficient>], prec: u64) -> Result<Vec<Vec<Coefficient>>> {
    let n = m.len();
    let mut a: Vec<Vec<Coefficient>> = m.to_vec();
    let mut inv: Vec<Vec<Coefficient>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Coefficient::Exact(BigRational::one())
                    } else {
                        Coefficient::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        // pivot: first row with provably nonzero entry
        let pivot_row = (col..n)
            .find(|&r| a[r][col].is_provably_nonzero())
            .ok_or(Error::SingularJacobian)?;
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pinv = a[col][col].recip(prec)?;
        for j in 0..n {
            a[col][j] = a[col][j].mul(&pinv, prec);
            inv[col][j] = inv[col][j].mul(&pinv, prec);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col].clone();
            if factor.is_provably_zero() {
                continue;
            }
            for j in 0..n {
                let t = factor.mul(&a[col][j], prec);
                a[r][j] = a[r][j].sub(&t, prec);
                let t2 = factor.mul(&inv[col][j], prec);
                inv[r][j] = inv[r][j].sub(&t2, prec);
            }
        }
    }
    Ok(inv)
}

// ---- canonical serialization (stable content hashing, CLI display) ----

impl SeriesExpr {
    /// Canonical S-expression of the derivation; stable across runs and used
    /// for content hashing.
    pub fn canonical_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s);
        s
    }

    fn write_sexpr(&self, out: &mut String) {
        match &self.node.kind {
            NodeKind::Poly(p) => {
                let _ = write!(out, "(poly {}", p.arity);
                for (m, c) in &p.terms {
                    let _ = write!(out, " ({}", c);
                    for k in &m.0 {
                        let _ = write!(out, " {}", k);
                    }
                    out.push(')');
                }
                out.push(')');
            }
            NodeKind::Alg(def) => {
                out.push_str("(alg (");
                for (j, row) in def.rows.iter().enumerate() {
                    if j > 0 {
                        out.push(' ');
                    }
                    out.push('(');
                    let deg = row.degree().map(|d| d as i64).unwrap_or(-1);
                    for k in 0..=deg.max(0) {
                        if k > 0 {
                            out.push(' ');
                        }
                        let _ = write!(out, "{}", row.coeff(k as usize));
                    }
                    out.push(')');
                }
                let _ = write!(out, ") {})", def.y0);
            }
            NodeKind::Add(a, b) => bin(out, "add", a, b),
            NodeKind::Mul(a, b) => bin(out, "mul", a, b),
            NodeKind::Recip(e) => un(out, "recip", e),
            NodeKind::SubstPoly(e, h) => {
                out.push_str("(subst ");
                e.write_sexpr(out);
                for p in h {
                    out.push(' ');
                    SeriesExpr::poly(p.clone()).write_sexpr(out);
                }
                out.push(')');
            }
            NodeKind::ComposeSeries(e, gs) => {
                out.push_str("(compose ");
                e.write_sexpr(out);
                for g in gs {
                    out.push(' ');
                    g.write_sexpr(out);
                }
                out.push(')');
            }
            NodeKind::Translate(e, a) => {
                out.push_str("(translate ");
                e.write_sexpr(out);
                for ai in a {
                    let _ = write!(out, " {}", ai);
                }
                out.push(')');
            }
            NodeKind::Antider(e, i) => idx(out, "antider", e, *i),
            NodeKind::Deriv(e, i) => idx(out, "deriv", e, *i),
            NodeKind::Restrict0(e, i) => idx(out, "restrict0", e, *i),
            NodeKind::Permute(e, sigma) => {
                out.push_str("(permute (");
                for (k, s) in sigma.iter().enumerate() {
                    if k > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "{}", s + 1);
                }
                out.push_str(") ");
                e.write_sexpr(out);
                out.push(')');
            }
            NodeKind::Inverse(e) => un(out, "inverse", e),
            NodeKind::Implicit { system, index } => {
                let _ = write!(out, "(implicit#{}", index);
                for f in system {
                    out.push(' ');
                    f.write_sexpr(out);
                }
                out.push(')');
            }
            NodeKind::Re(e) => un(out, "re", e),
            NodeKind::Im(e) => un(out, "im", e),
        }
    }

    /// Hex SHA-256 of the canonical serialization (first 16 hex digits).
    pub fn derivation_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.canonical_sexpr().as_bytes());
        let out = h.finalize();
        out.iter().take(8).map(|b| format!("{:02x}", b)).collect()
    }
}

fn bin(out: &mut String, tag: &str, a: &SeriesExpr, b: &SeriesExpr) {
    out.push('(');
    out.push_str(tag);
    out.push(' ');
    a.write_sexpr(out);
    out.push(' ');
    b.write_sexpr(out);
    out.push(')');
}

fn un(out: &mut String, tag: &str, e: &SeriesExpr) {
    out.push('(');
    out.push_str(tag);
    out.push(' ');
    e.write_sexpr(out);
    out.push(')');
}

fn idx(out: &mut String, tag: &str, e: &SeriesExpr, i: usize) {
    out.push('(');
    out.push_str(tag);
    let _ = write!(out, " {} ", i + 1);
    e.write_sexpr(out);
    out.push(')');
}
