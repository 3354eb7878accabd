use std::fmt;

/// Exponent vector of a monomial, one entry per variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(arity: usize) -> Self {
        MultiIndex(vec![0; arity])
    }

    pub fn unit(arity: usize, slot: usize) -> Self {
        let mut v = vec![0; arity];
        v[slot] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree: sum of the entries.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Componentwise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference; `None` if any entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), other.len());
        let mut v = Vec::with_capacity(self.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            v.push(a - b);
        }
        Some(MultiIndex(v))
    }

    /// `self <= other` componentwise.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Bump entry `i` by one.
    pub fn bumped(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    /// Decrement entry `i` by one; `None` if it is zero.
    pub fn lowered(&self, i: usize) -> Option<MultiIndex> {
        if self.0[i] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[i] -= 1;
        Some(MultiIndex(v))
    }

    /// Insert a new entry with value `val` at slot `i`.
    pub fn inserted(&self, i: usize, val: u32) -> MultiIndex {
        let mut v = self.0.clone();
        v.insert(i, val);
        MultiIndex(v)
    }

    /// Remove the entry at slot `i`.
    pub fn removed(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v.remove(i);
        MultiIndex(v)
    }

    /// All multi-indices of the given arity with total degree <= `max_deg`,
    /// in lexicographic order.
    pub fn all_up_to(arity: usize, max_deg: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; arity];
        collect(&mut cur, 0, max_deg, &mut out);
        out
    }

    /// All multi-indices of the given arity with total degree exactly `deg`.
    pub fn all_of_degree(arity: usize, deg: u32) -> Vec<MultiIndex> {
        if arity == 0 {
            return if deg == 0 { vec![MultiIndex(vec![])] } else { vec![] };
        }
        let mut out = Vec::new();
        let mut cur = vec![0u32; arity];
        fn rec(cur: &mut Vec<u32>, slot: usize, left: u32, out: &mut Vec<MultiIndex>) {
            if slot == cur.len() - 1 {
                cur[slot] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for v in 0..=left {
                cur[slot] = v;
                rec(cur, slot + 1, left - v, out);
            }
        }
        rec(&mut cur, 0, deg, &mut out);
        out
    }

    /// All sub-indices `beta <= self` (componentwise), including zero and self.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.len()];
        fn rec(bound: &[u32], cur: &mut Vec<u32>, slot: usize, out: &mut Vec<MultiIndex>) {
            if slot == bound.len() {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for v in 0..=bound[slot] {
                cur[slot] = v;
                rec(bound, cur, slot + 1, out);
            }
        }
        rec(&self.0, &mut cur, 0, &mut out);
        out
    }
}

fn collect(cur: &mut Vec<u32>, slot: usize, budget: u32, out: &mut Vec<MultiIndex>) {
    if slot == cur.len() {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for v in 0..=budget {
        cur[slot] = v;
        collect(cur, slot + 1, budget - v, out);
    }
    cur[slot] = 0;
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        // #{alpha in N_0^2 : |alpha| <= 3} = C(5,2) = 10
        assert_eq!(MultiIndex::all_up_to(2, 3).len(), 10);
        assert_eq!(MultiIndex::all_up_to(0, 5).len(), 1);
    }

    #[test]
    fn sub_indices_are_boxed() {
        let a = MultiIndex(vec![2, 1]);
        let subs = a.sub_indices();
        assert_eq!(subs.len(), 6);
        assert!(subs.iter().all(|b| b.le(&a)));
    }
}
