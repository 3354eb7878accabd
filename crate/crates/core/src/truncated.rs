use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::coeff::Coefficient;
use crate::index::MultiIndex;

/// A finite window onto a series: every coefficient of total degree at most
/// `order`, inclusive of zeros.
#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    pub arity: usize,
    pub order: u32,
    pub coeffs: BTreeMap<MultiIndex, Coefficient>,
}

impl TruncatedSeries {
    pub fn coeff(&self, alpha: &MultiIndex) -> Coefficient {
        self.coeffs.get(alpha).cloned().unwrap_or_else(Coefficient::zero)
    }

    /// True when every stored coefficient is provably zero.
    pub fn is_provably_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.is_provably_zero())
    }

    /// Exact coefficients only; `None` when any entry is certified.
    pub fn exact_coeff(&self, alpha: &MultiIndex) -> Option<BigRational> {
        self.coeff(alpha).as_exact().cloned()
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = (&MultiIndex, &Coefficient)> {
        self.coeffs.iter().filter(|(_, c)| !c.is_provably_zero())
    }
}
