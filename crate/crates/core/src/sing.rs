//! Singularity sets `N ⊂ ℤ`, their Willmore contributions and blow-up polynomials.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SingError {
    #[error("negatives and excluded members differ in count ({0} vs {1})")]
    Unbalanced(usize, usize),
    #[error("negatives must be strictly decreasing negative integers")]
    BadNegatives,
    #[error("excluded members must be strictly increasing non-negative integers")]
    BadExcluded,
    #[error("the blow-up polynomial needs a nonempty set")]
    Empty,
    #[error("the blow-up system is singular")]
    Inconsistent,
}

/// `N = (ℕ₀ \ excluded) ∪ negatives`, stored by its two finite parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SingSet {
    negatives: Vec<i64>,
    excluded: Vec<i64>,
}

impl SingSet {
    /// Accepts the two parts in any order; they are normalized on construction.
    pub fn new(mut negatives: Vec<i64>, mut excluded: Vec<i64>) -> Result<Self, SingError> {
        if negatives.len() != excluded.len() {
            return Err(SingError::Unbalanced(negatives.len(), excluded.len()));
        }
        negatives.sort_unstable_by(|a, b| b.cmp(a));
        excluded.sort_unstable();
        if negatives.iter().any(|&n| n >= 0) || negatives.windows(2).any(|w| w[0] == w[1]) {
            return Err(SingError::BadNegatives);
        }
        if excluded.iter().any(|&n| n < 0) || excluded.windows(2).any(|w| w[0] == w[1]) {
            return Err(SingError::BadExcluded);
        }
        Ok(SingSet { negatives, excluded })
    }

    pub fn empty() -> Self {
        SingSet { negatives: Vec::new(), excluded: Vec::new() }
    }

    pub fn negatives(&self) -> &[i64] {
        &self.negatives
    }

    pub fn excluded(&self) -> &[i64] {
        &self.excluded
    }

    pub fn m(&self) -> usize {
        self.negatives.len()
    }

    /// `d = −min(N)`, zero for `N = ℕ₀`.
    pub fn depth(&self) -> i64 {
        self.negatives.last().map(|&n| -n).unwrap_or(0)
    }

    pub fn contains(&self, n: i64) -> bool {
        if n < 0 {
            self.negatives.contains(&n)
        } else {
            !self.excluded.contains(&n)
        }
    }

    /// Points of `{n ≥ −d} \ N`.
    pub fn vanishing_set(&self) -> Vec<i64> {
        let d = self.depth();
        let mut v: Vec<i64> = (-d..0).filter(|n| !self.negatives.contains(n)).collect();
        v.extend(self.excluded.iter().copied());
        v
    }

    /// Willmore contribution in units of `4π`: `Σ⁺ − Σ⁻`.
    pub fn wsing(&self) -> i64 {
        self.excluded.iter().sum::<i64>() - self.negatives.iter().sum::<i64>()
    }
}

impl fmt::Display for SingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut neg = self.negatives.clone();
        neg.reverse();
        write!(f, "({}|{})", join(&neg), join(&self.excluded))
    }
}

pub fn wsing_of_set(s: &SingSet) -> i64 {
    s.wsing()
}

/// Strictly increasing sequences of `len` distinct integers `≥ lo` with sum `total`.
fn distinct_parts(len: usize, lo: i64, total: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if len == 0 {
        if total == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    let l = len as i64;
    let mut a = lo;
    // smallest completion is a, a+1, ..., a+len-1
    while l * a + l * (l - 1) / 2 <= total {
        prefix.push(a);
        distinct_parts(len - 1, a + 1, total - a, prefix, out);
        prefix.pop();
        a += 1;
    }
}

/// All sets with `1 ≤ Σ⁺ − Σ⁻ ≤ max_multiplier`, ordered by multiplier, then `m`,
/// then negatives lexicographically (in increasing absolute value), then excluded.
pub fn enumerate_sets(max_multiplier: i64) -> Vec<SingSet> {
    let mut out = Vec::new();
    for w in 1..=max_multiplier {
        let mut m = 1usize;
        while (m * m) as i64 <= w {
            let mut row = Vec::new();
            let ml = m as i64;
            let neg_min = ml * (ml + 1) / 2;
            let exc_min = ml * (ml - 1) / 2;
            for neg_abs in neg_min..=(w - exc_min) {
                let exc_sum = w - neg_abs;
                let mut negs = Vec::new();
                distinct_parts(m, 1, neg_abs, &mut Vec::new(), &mut negs);
                let mut excs = Vec::new();
                distinct_parts(m, 0, exc_sum, &mut Vec::new(), &mut excs);
                for n in &negs {
                    for e in &excs {
                        let s = SingSet::new(n.iter().map(|x| -x).collect(), e.clone())
                            .expect("enumeration produces valid sets");
                        row.push(s);
                    }
                }
            }
            row.sort_by(|a, b| {
                let ka: Vec<i64> = a.negatives.iter().rev().map(|x| -x).collect();
                let kb: Vec<i64> = b.negatives.iter().rev().map(|x| -x).collect();
                ka.cmp(&kb).then_with(|| a.excluded.cmp(&b.excluded))
            });
            out.extend(row);
            m += 1;
        }
    }
    out
}

/// Rows of the table: `(multiplier, m, sets)`.
pub fn grouped_table(max_multiplier: i64) -> Vec<(i64, usize, Vec<SingSet>)> {
    let mut rows: Vec<(i64, usize, Vec<SingSet>)> = Vec::new();
    for s in enumerate_sets(max_multiplier) {
        let key = (s.wsing(), s.m());
        match rows.last_mut() {
            Some(r) if (r.0, r.1) == key => r.2.push(s),
            _ => rows.push((key.0, key.1, vec![s])),
        }
    }
    rows
}

/// Independent enumeration over subsets of a window, for cross-checks.
pub fn brute_force_sets(max_multiplier: i64, window: i64) -> BTreeSet<SingSet> {
    let neg: Vec<i64> = (-window..0).collect();
    let non: Vec<i64> = (0..=window).collect();
    let mut out = BTreeSet::new();
    for nmask in 0u64..(1u64 << neg.len()) {
        let negatives: Vec<i64> = (0..neg.len()).filter(|i| nmask >> i & 1 == 1).map(|i| neg[i]).collect();
        for emask in 0u64..(1u64 << non.len()) {
            if emask.count_ones() as usize != negatives.len() {
                continue;
            }
            let excluded: Vec<i64> = (0..non.len()).filter(|i| emask >> i & 1 == 1).map(|i| non[i]).collect();
            let s = SingSet::new(negatives.clone(), excluded).expect("window subsets are valid");
            let w = s.wsing();
            if w >= 1 && w <= max_multiplier {
                out.insert(s);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupPolynomials {
    /// Monomial coefficients of `p`, lowest degree first; the last entry is 1.
    pub p: Vec<BigInt>,
    /// Coefficients `(1, a₁, …, a_d)`.
    pub q: Vec<BigInt>,
}

impl BlowupPolynomials {
    pub fn q_i64(&self) -> Vec<i64> {
        self.q.iter().map(|x| x.to_i64().expect("coefficient fits in i64")).collect()
    }

    pub fn p_i64(&self) -> Vec<i64> {
        self.p.iter().map(|x| x.to_i64().expect("coefficient fits in i64")).collect()
    }
}

fn poly_from_roots(roots: &[i64]) -> Vec<BigRational> {
    let mut p = vec![BigRational::one()];
    for &r in roots {
        let mut next = vec![BigRational::zero(); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            next[i + 1] += c.clone();
            next[i] -= c.clone() * BigRational::from_integer(BigInt::from(r));
        }
        p = next;
    }
    p
}

fn eval_rational(p: &[BigRational], z: i64) -> BigRational {
    let zr = BigRational::from_integer(BigInt::from(z));
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * zr.clone() + c.clone())
}

/// Solves for `a₁..a_d` in `p(z) = Σ_j a_j Π_{i=j+1}^{d}(z+i)` (with `a₀ = 1`)
/// so that `p` vanishes on `{n ≥ −d} \ N`, by exact Gaussian elimination.
pub fn blowup_polynomials(s: &SingSet) -> Result<BlowupPolynomials, SingError> {
    if s.m() == 0 {
        return Err(SingError::Empty);
    }
    let d = s.depth() as usize;
    let zeros = s.vanishing_set();
    if zeros.len() != d {
        return Err(SingError::Inconsistent);
    }
    // basis[j] = Π_{i=j+1}^{d}(z+i)
    let basis: Vec<Vec<BigRational>> =
        (0..=d).map(|j| poly_from_roots(&((j + 1)..=d).map(|i| -(i as i64)).collect::<Vec<_>>())).collect();
    let mut mat: Vec<Vec<BigRational>> = zeros
        .iter()
        .map(|&z| {
            let mut row: Vec<BigRational> = (1..=d).map(|j| eval_rational(&basis[j], z)).collect();
            row.push(-eval_rational(&basis[0], z));
            row
        })
        .collect();
    for col in 0..d {
        let piv = (col..d).find(|&r| !mat[r][col].is_zero()).ok_or(SingError::Inconsistent)?;
        mat.swap(col, piv);
        let inv = mat[col][col].recip();
        for c in col..=d {
            mat[col][c] = mat[col][c].clone() * inv.clone();
        }
        for r in 0..d {
            if r != col && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in col..=d {
                    let t = mat[col][c].clone() * f.clone();
                    mat[r][c] -= t;
                }
            }
        }
    }
    let mut a = vec![BigRational::one()];
    a.extend((0..d).map(|r| mat[r][d].clone()));
    let mut p = vec![BigRational::zero(); d + 1];
    for (j, aj) in a.iter().enumerate() {
        for (i, c) in basis[j].iter().enumerate() {
            p[i] += aj.clone() * c.clone();
        }
    }
    let to_int = |v: &[BigRational]| -> Result<Vec<BigInt>, SingError> {
        v.iter().map(|x| if x.is_integer() { Ok(x.to_integer()) } else { Err(SingError::Inconsistent) }).collect()
    };
    let q = to_int(&a)?;
    let p = to_int(&p)?;
    debug_assert!(q[0].abs() == BigInt::one());
    Ok(BlowupPolynomials { p, q })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(neg: &[i64], exc: &[i64]) -> SingSet {
        SingSet::new(neg.to_vec(), exc.to_vec()).unwrap()
    }

    #[test]
    fn wsing_examples() {
        assert_eq!(set(&[-1], &[0]).wsing(), 1);
        assert_eq!(set(&[-2, -1], &[0, 2]).wsing(), 5);
        assert_eq!(SingSet::empty().wsing(), 0);
        assert!(SingSet::new(vec![-1], vec![]).is_err());
        assert!(SingSet::new(vec![1], vec![0]).is_err());
    }

    #[test]
    fn first_rows() {
        let s = enumerate_sets(1);
        assert_eq!(s, vec![set(&[-1], &[0])]);
        let s = enumerate_sets(4);
        assert!(s.contains(&set(&[-2, -1], &[0, 1])));
    }

    #[test]
    fn blowup_examples() {
        let b = blowup_polynomials(&set(&[-1], &[0])).unwrap();
        assert_eq!(b.q_i64(), vec![1, -1]);
        assert_eq!(b.p_i64(), vec![0, 1]);
        let b = blowup_polynomials(&set(&[-2], &[0])).unwrap();
        assert_eq!(b.q_i64(), vec![1, -2, 2]);
        assert!(blowup_polynomials(&SingSet::empty()).is_err());
    }

    #[test]
    fn display_form() {
        assert_eq!(set(&[-1, -2], &[2, 0]).to_string(), "(-2,-1|0,2)");
    }
}
