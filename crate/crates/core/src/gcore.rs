//! Graded coordinate contexts, multi-indices and Koszul sign bookkeeping.
//!
//! A [`CoordinateContext`] fixes an ordered list of coordinates `z^1, …, z^n`
//! with integer degrees. The declaration order is the canonical order used by
//! every normal form in the crate: monomials `z^I = (z^1)^{i_1} ⋯ (z^n)^{i_n}`,
//! multi-index enumeration and sign conventions all refer to it.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest absolute coordinate degree accepted by default.
pub const DEFAULT_DEGREE_BOUND: i64 = 64;

/// A graded coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub name: String,
    pub degree: i64,
}

/// Ordered list of graded coordinates of a single chart.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoordinateContext {
    coords: Vec<Coord>,
}

/// Shared handle to a context.
pub type Ctx = Arc<CoordinateContext>;

impl CoordinateContext {
    pub fn new(coords: Vec<Coord>) -> Result<Self> {
        Self::with_degree_bound(coords, DEFAULT_DEGREE_BOUND)
    }

    pub fn with_degree_bound(coords: Vec<Coord>, bound: i64) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &coords {
            if c.name.is_empty() {
                return Err(Error::InvalidContext("empty coordinate name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidContext(format!(
                    "duplicate coordinate `{}`",
                    c.name
                )));
            }
            if c.degree.abs() > bound {
                return Err(Error::InvalidContext(format!(
                    "degree {} of `{}` exceeds bound {bound}",
                    c.degree, c.name
                )));
            }
        }
        Ok(Self { coords })
    }

    /// Convenience constructor from `(name, degree)` pairs.
    pub fn from_pairs(pairs: &[(&str, i64)]) -> Result<Ctx> {
        let coords = pairs
            .iter()
            .map(|(n, d)| Coord {
                name: (*n).to_string(),
                degree: *d,
            })
            .collect();
        Ok(Arc::new(Self::new(coords)?))
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn degree(&self, a: usize) -> i64 {
        self.coords[a].degree
    }

    pub fn is_odd(&self, a: usize) -> bool {
        self.coords[a].degree.rem_euclid(2) == 1
    }

    pub fn name(&self, a: usize) -> &str {
        &self.coords[a].name
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c.name == name)
    }

    /// Number of coordinates of each degree.
    pub fn graded_dimension(&self) -> std::collections::BTreeMap<i64, usize> {
        let mut out = std::collections::BTreeMap::new();
        for c in &self.coords {
            *out.entry(c.degree).or_insert(0) += 1;
        }
        out
    }

    pub fn check_index(&self, index: &MultiIndex) -> Result<()> {
        if index.len() != self.dim() {
            return Err(Error::InvalidIndex(index.0.clone()));
        }
        for (a, &e) in index.0.iter().enumerate() {
            if e > 1 && self.is_odd(a) {
                return Err(Error::InvalidIndex(index.0.clone()));
            }
        }
        Ok(())
    }

    pub fn index_degree(&self, index: &MultiIndex) -> i64 {
        index
            .0
            .iter()
            .zip(&self.coords)
            .map(|(&e, c)| e as i64 * c.degree)
            .sum()
    }

    /// Parity of `|z^I|`.
    pub fn index_parity(&self, index: &MultiIndex) -> bool {
        self.index_degree(index).rem_euclid(2) == 1
    }
}

impl fmt::Display for CoordinateContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", c.name, c.degree)?;
        }
        write!(f, ")")
    }
}

/// Exponent tuple `(i_1, …, i_n)`.
///
/// Ordering is lexicographic on the exponent tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, a: usize) -> Self {
        let mut v = vec![0; n];
        v[a] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn factorial(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, &e| acc * factorial(e))
    }

    pub fn le(&self, other: &Self) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other`, or `None` when `other ≰ self`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if !other.le(self) {
            return None;
        }
        Some(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// The multiset of coordinates `(z^1,…,z^1, …, z^n,…,z^n)` as a list of
    /// coordinate positions.
    pub fn letters(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(a, &e)| std::iter::repeat_n(a, e as usize))
            .collect()
    }

    /// All `K ≤ self`, in lexicographic order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::with_capacity(self.len())];
        for &e in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for prefix in &out {
                for k in 0..=e {
                    let mut p = prefix.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter().map(MultiIndex).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `binom(I, K) = Π binom(i_A, k_A)`.
pub fn index_binomial(i: &MultiIndex, k: &MultiIndex) -> Result<BigInt> {
    if !k.le(i) {
        return Err(Error::NotBelow {
            sub: k.0.clone(),
            sup: i.0.clone(),
        });
    }
    Ok(i.0
        .iter()
        .zip(&k.0)
        .fold(BigInt::one(), |acc, (&a, &b)| acc * binomial(a, b)))
}

/// Weight, factorial, degree and (optionally) binomial of multi-indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexArith {
    pub weight: u32,
    pub factorial: BigInt,
    pub degree: i64,
    pub binomial: Option<BigInt>,
}

pub fn index_arith(
    ctx: &CoordinateContext,
    i: &MultiIndex,
    k: Option<&MultiIndex>,
) -> Result<IndexArith> {
    ctx.check_index(i)?;
    let binomial = match k {
        Some(k) => Some(index_binomial(i, k)?),
        None => None,
    };
    Ok(IndexArith {
        weight: i.weight(),
        factorial: i.factorial(),
        degree: ctx.index_degree(i),
        binomial,
    })
}

/// Elements of `N̄ⁿ(j)`: exponent tuples of weight `j`, with exponents capped
/// at 1 on odd coordinates. Ordered lexicographically, largest first.
pub fn multi_indices(ctx: &CoordinateContext, j: u32) -> Vec<MultiIndex> {
    fn rec(
        ctx: &CoordinateContext,
        a: usize,
        left: u32,
        cur: &mut Vec<u32>,
        out: &mut Vec<MultiIndex>,
    ) {
        let n = ctx.dim();
        if a == n {
            if left == 0 {
                out.push(MultiIndex(cur.clone()));
            }
            return;
        }
        let cap = if ctx.is_odd(a) { left.min(1) } else { left };
        for e in (0..=cap).rev() {
            cur.push(e);
            rec(ctx, a + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if ctx.dim() == 0 {
        if j == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return out;
    }
    rec(ctx, 0, j, &mut Vec::with_capacity(ctx.dim()), &mut out);
    out
}

/// `N̄ⁿ(0) ∪ … ∪ N̄ⁿ(k)`, grouped by weight.
pub fn multi_indices_up_to(ctx: &CoordinateContext, k: u32) -> Vec<MultiIndex> {
    (0..=k).flat_map(|j| multi_indices(ctx, j)).collect()
}

/// An ordered product of coordinates, possibly with repetitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KoszulWord {
    pub letters: Vec<usize>,
}

/// Result of bringing a word into context order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Zero,
    Term { negative: bool, index: MultiIndex },
}

/// Sorts the letters of a word into context order, tracking the Koszul sign
/// of every adjacent transposition. Vanishes when an odd letter repeats.
pub fn normalize_word(ctx: &CoordinateContext, word: &KoszulWord) -> Result<Normalized> {
    let mut letters = word.letters.clone();
    for &l in &letters {
        if l >= ctx.dim() {
            return Err(Error::BadCoordinate(l));
        }
    }
    let mut negative = false;
    // insertion sort; each swap of adjacent letters costs (−1)^{|a||b|}
    for i in 1..letters.len() {
        let mut j = i;
        while j > 0 && letters[j - 1] > letters[j] {
            if ctx.is_odd(letters[j - 1]) && ctx.is_odd(letters[j]) {
                negative = !negative;
            }
            letters.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut exps = vec![0u32; ctx.dim()];
    for &l in &letters {
        exps[l] += 1;
        if exps[l] > 1 && ctx.is_odd(l) {
            return Ok(Normalized::Zero);
        }
    }
    Ok(Normalized::Term {
        negative,
        index: MultiIndex(exps),
    })
}

/// `σ(I,K) = Σ_{A≥2} (i_A − k_A)|z^A| (k_1|z^1| + … + k_{A−1}|z^{A−1}|)`,
/// returned as a parity (`true` means the sign is `−1`).
pub fn sigma_parity(ctx: &CoordinateContext, i: &MultiIndex, k: &MultiIndex) -> Result<bool> {
    if !k.le(i) || i.len() != ctx.dim() {
        return Err(Error::NotBelow {
            sub: k.0.clone(),
            sup: i.0.clone(),
        });
    }
    let mut prefix: i64 = 0;
    let mut total: i64 = 0;
    for a in 0..ctx.dim() {
        let d = ctx.degree(a);
        let diff = (i.0[a] - k.0[a]) as i64;
        total += diff * d * prefix;
        prefix += k.0[a] as i64 * d;
    }
    Ok(total.rem_euclid(2) == 1)
}

/// `(−1)^{σ(I,K)}` as `±1`.
pub fn sigma_sign(ctx: &CoordinateContext, i: &MultiIndex, k: &MultiIndex) -> Result<i32> {
    Ok(if sigma_parity(ctx, i, k)? { -1 } else { 1 })
}

/// `(−1)^e` as a parity flag for a possibly negative exponent.
#[inline]
pub fn parity(e: i64) -> bool {
    e.rem_euclid(2) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xtp() -> Ctx {
        CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("p", 2)]).unwrap()
    }

    fn two_odd() -> Ctx {
        CoordinateContext::from_pairs(&[("θ1", 1), ("θ2", 1)]).unwrap()
    }

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn enumerates_weight_two_indices() {
        let got = multi_indices(&xtp(), 2);
        let want: Vec<_> = [[2, 0, 0], [1, 1, 0], [1, 0, 1], [0, 1, 1], [0, 0, 2]]
            .iter()
            .map(|v| idx(v))
            .collect();
        assert_eq!(got, want);
        assert_eq!(multi_indices(&two_odd(), 2), vec![idx(&[1, 1])]);
        assert_eq!(multi_indices(&two_odd(), 3), Vec::<MultiIndex>::new());
    }

    #[test]
    fn weight_zero_is_the_zero_index() {
        for ctx in [xtp(), two_odd()] {
            assert_eq!(multi_indices(&ctx, 0), vec![MultiIndex::zero(ctx.dim())]);
        }
        let empty = CoordinateContext::from_pairs(&[]).unwrap();
        assert_eq!(multi_indices(&empty, 0).len(), 1);
        assert!(multi_indices(&empty, 1).is_empty());
    }

    #[test]
    fn rejects_duplicate_and_oversized() {
        assert!(CoordinateContext::from_pairs(&[("x", 0), ("x", 1)]).is_err());
        assert!(CoordinateContext::from_pairs(&[("x", 65)]).is_err());
        assert!(CoordinateContext::from_pairs(&[("x", -64)]).is_ok());
    }

    #[test]
    fn normalizes_words() {
        let ctx = CoordinateContext::from_pairs(&[("x", 0), ("θ", 1)]).unwrap();
        assert_eq!(
            normalize_word(
                &ctx,
                &KoszulWord {
                    letters: vec![1, 0]
                }
            )
            .unwrap(),
            Normalized::Term {
                negative: false,
                index: idx(&[1, 1])
            }
        );
        assert_eq!(
            normalize_word(
                &ctx,
                &KoszulWord {
                    letters: vec![1, 1]
                }
            )
            .unwrap(),
            Normalized::Zero
        );
        assert_eq!(
            normalize_word(
                &two_odd(),
                &KoszulWord {
                    letters: vec![1, 0]
                }
            )
            .unwrap(),
            Normalized::Term {
                negative: true,
                index: idx(&[1, 1])
            }
        );
        assert!(normalize_word(&ctx, &KoszulWord { letters: vec![2] }).is_err());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(
            sigma_sign(&xtp(), &idx(&[0, 1, 1]), &idx(&[0, 1, 0])).unwrap(),
            1
        );
        assert_eq!(
            sigma_sign(&two_odd(), &idx(&[1, 1]), &idx(&[1, 0])).unwrap(),
            -1
        );
        assert_eq!(
            sigma_sign(&xtp(), &idx(&[2, 1, 1]), &idx(&[0, 0, 0])).unwrap(),
            1
        );
        assert!(sigma_sign(&xtp(), &idx(&[0, 1, 0]), &idx(&[1, 0, 0])).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let ctx = xtp();
        let a = index_arith(&ctx, &idx(&[2, 0, 0]), Some(&idx(&[1, 0, 0]))).unwrap();
        assert_eq!(a.weight, 2);
        assert_eq!(a.factorial, BigInt::from(2));
        assert_eq!(a.degree, 0);
        assert_eq!(a.binomial, Some(BigInt::from(2)));
        assert_eq!(ctx.index_degree(&idx(&[1, 0, 1])), 2);
        assert!(index_arith(&ctx, &idx(&[1, 0, 0]), Some(&idx(&[2, 0, 0]))).is_err());
        assert!(index_arith(&ctx, &idx(&[0, 2, 0]), None).is_err());
    }

    #[test]
    fn sub_indices_cover_the_box() {
        let subs = idx(&[2, 1]).sub_indices();
        assert_eq!(subs.len(), 6);
        assert!(subs.iter().all(|k| k.le(&idx(&[2, 1]))));
    }
}
