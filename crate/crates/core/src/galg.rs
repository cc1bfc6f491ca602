//! Graded-commutative polynomials with exact rational coefficients.
//!
//! Degree-0 coordinates behave like ordinary commuting variables; odd
//! coordinates square to zero and anticommute with each other. Monomials are
//! kept in context order, so a polynomial is a sparse map from multi-indices
//! to nonzero rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gcore::{index_binomial, parity, sigma_parity, CoordinateContext, Ctx, MultiIndex};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn same_ctx(a: &Ctx, b: &Ctx) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Product of two monomials in normal form.
///
/// Returns `None` when the product vanishes, otherwise the sign flag
/// (`true` for `−1`) and the combined index.
pub fn monomial_mul(
    ctx: &CoordinateContext,
    i: &MultiIndex,
    j: &MultiIndex,
) -> Option<(bool, MultiIndex)> {
    let n = ctx.dim();
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let e = i.0[a] + j.0[a];
        if e > 1 && ctx.is_odd(a) {
            return None;
        }
        out.push(e);
    }
    // each odd letter of `j` must move left past the odd letters of `i`
    // sitting at later positions
    let mut negative = false;
    let mut odd_i_after = 0u32;
    for a in (0..n).rev() {
        if ctx.is_odd(a) {
            if j.0[a] == 1 && odd_i_after % 2 == 1 {
                negative = !negative;
            }
            odd_i_after += i.0[a];
        }
    }
    Some((negative, MultiIndex(out)))
}

/// Exact sparse polynomial over a coordinate context.
#[derive(Clone)]
pub struct Poly {
    ctx: Ctx,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        same_ctx(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for Poly {}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl Poly {
    pub fn zero(ctx: &Ctx) -> Self {
        Self {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Ctx, c: Rational) -> Self {
        Self::monomial(ctx, MultiIndex::zero(ctx.dim()), c)
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::constant(ctx, Rational::one())
    }

    /// `c · z^I`. Panics if `I` violates the odd cap.
    pub fn monomial(ctx: &Ctx, index: MultiIndex, c: Rational) -> Self {
        ctx.check_index(&index).expect("monomial index");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(index, c);
        }
        Self {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn var(ctx: &Ctx, a: usize) -> Self {
        Self::monomial(ctx, MultiIndex::unit(ctx.dim(), a), Rational::one())
    }

    /// Builds a polynomial from raw terms, validating indices.
    pub fn from_terms(
        ctx: &Ctx,
        terms: impl IntoIterator<Item = (MultiIndex, Rational)>,
    ) -> Result<Self> {
        let mut p = Self::zero(ctx);
        for (idx, c) in terms {
            ctx.check_index(&idx)?;
            p.add_term(idx, c);
        }
        Ok(p)
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, index: &MultiIndex) -> Rational {
        self.terms
            .get(index)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub(crate) fn add_term(&mut self, index: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(index) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Degree when homogeneous and nonzero.
    pub fn degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|i| self.ctx.index_degree(i));
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    /// The zero polynomial counts as homogeneous of every degree.
    pub fn is_homogeneous_of(&self, d: i64) -> bool {
        self.terms.keys().all(|i| self.ctx.index_degree(i) == d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    /// Decomposition into homogeneous pieces keyed by degree.
    pub fn pieces(&self) -> BTreeMap<i64, Poly> {
        let mut out: BTreeMap<i64, Poly> = BTreeMap::new();
        for (i, c) in &self.terms {
            out.entry(self.ctx.index_degree(i))
                .or_insert_with(|| Poly::zero(&self.ctx))
                .add_term(i.clone(), c.clone());
        }
        out
    }

    /// Largest weight of a monomial, `None` for zero.
    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(|i| i.weight()).max()
    }

    pub fn min_weight(&self) -> Option<u32> {
        self.terms.keys().map(|i| i.weight()).min()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        Self {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(i, v)| (i.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by `±1`.
    pub fn signed(&self, negative: bool) -> Self {
        if negative {
            -self
        } else {
            self.clone()
        }
    }

    fn check_ctx(&self, other: &Self) -> Result<()> {
        if same_ctx(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(i.clone(), c.clone());
        }
        Ok(out)
    }

    /// Graded-commutative product.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        let mut out = Self::zero(&self.ctx);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                if let Some((neg, k)) = monomial_mul(&self.ctx, i, j) {
                    let c = a * b;
                    out.add_term(k, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    fn check_coord(&self, a: usize) -> Result<()> {
        if a < self.ctx.dim() {
            Ok(())
        } else {
            Err(Error::BadCoordinate(a))
        }
    }

    /// Left derivative `∂f/∂z^A`.
    pub fn partial_left(&self, a: usize) -> Result<Self> {
        self.check_coord(a)?;
        let ctx = &self.ctx;
        let mut out = Self::zero(ctx);
        for (i, c) in &self.terms {
            let e = i.0[a];
            if e == 0 {
                continue;
            }
            let mut negative = false;
            if ctx.is_odd(a) {
                let before: u32 = (0..a).filter(|&b| ctx.is_odd(b)).map(|b| i.0[b]).sum();
                negative = before % 2 == 1;
            }
            let mut k = i.clone();
            k.0[a] -= 1;
            let v = c * int(e as i64);
            out.add_term(k, if negative { -v } else { v });
        }
        Ok(out)
    }

    /// Right derivative `∂^◁_A f = (−1)^{|z^A|(1+|f|)} ∂f/∂z^A`, applied per
    /// homogeneous piece.
    pub fn partial_right(&self, a: usize) -> Result<Self> {
        self.check_coord(a)?;
        let da = self.ctx.degree(a);
        let mut out = Self::zero(&self.ctx);
        for (i, c) in &self.terms {
            let flip = parity(da * (1 + self.ctx.index_degree(i)));
            let mono = Self::monomial(&self.ctx, i.clone(), c.clone()).partial_left(a)?;
            for (k, v) in mono.terms {
                out.add_term(k, if flip { -v } else { v });
            }
        }
        Ok(out)
    }

    /// `∂^op_I = (∂_n)^{i_n} ∘ ⋯ ∘ (∂_1)^{i_1}`: the first coordinate acts first.
    pub fn partial_op(&self, index: &MultiIndex) -> Result<Self> {
        if index.len() != self.ctx.dim() {
            return Err(Error::InvalidIndex(index.0.clone()));
        }
        let mut f = self.clone();
        for (a, &e) in index.0.iter().enumerate() {
            for _ in 0..e {
                if f.is_zero() {
                    return Ok(f);
                }
                f = f.partial_left(a)?;
            }
        }
        Ok(f)
    }

    /// `∂^◁_I = (∂^◁_1)^{i_1} ∘ ⋯ ∘ (∂^◁_n)^{i_n}`: the last coordinate acts first.
    pub fn partial_right_multi(&self, index: &MultiIndex) -> Result<Self> {
        if index.len() != self.ctx.dim() {
            return Err(Error::InvalidIndex(index.0.clone()));
        }
        let mut f = self.clone();
        for (a, &e) in index.0.iter().enumerate().rev() {
            for _ in 0..e {
                if f.is_zero() {
                    return Ok(f);
                }
                f = f.partial_right(a)?;
            }
        }
        Ok(f)
    }

    /// Replaces every degree-0 coordinate `z^A` by `z^A + shift_A`.
    pub fn shift(&self, shift: &[Rational]) -> Self {
        let ctx = &self.ctx;
        let mut out = Self::zero(ctx);
        for (i, c) in &self.terms {
            // expand Π (z^A + a_A)^{i_A} over degree-0 coordinates
            let mut partial: Vec<(Vec<u32>, Rational)> = vec![(i.0.clone(), c.clone())];
            for a in 0..ctx.dim() {
                if ctx.degree(a) != 0 || i.0[a] == 0 || shift[a].is_zero() {
                    continue;
                }
                let e = i.0[a];
                let mut next = Vec::with_capacity(partial.len() * (e as usize + 1));
                for (exp, coeff) in &partial {
                    for k in 0..=e {
                        let mut ex = exp.clone();
                        ex[a] = k;
                        let b = crate::gcore::binomial(e, k);
                        let pw = num_traits::pow(shift[a].clone(), (e - k) as usize);
                        next.push((ex, coeff * Rational::from_integer(b) * pw));
                    }
                }
                partial = next;
            }
            for (exp, coeff) in partial {
                out.add_term(MultiIndex(exp), coeff);
            }
        }
        out
    }

    /// Keeps the monomials of weight at most `q`.
    pub fn truncate_weight(&self, q: u32) -> Self {
        Self {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| i.weight() <= q)
                .map(|(i, c)| (i.clone(), c.clone()))
                .collect(),
        }
    }

    /// Value of the body at a point.
    pub fn evaluate_body(&self, point: &Point) -> Result<Rational> {
        let vals = point.values_for(&self.ctx)?;
        Ok(self.evaluate_body_at(&vals))
    }

    pub(crate) fn evaluate_body_at(&self, vals: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        'terms: for (i, c) in &self.terms {
            let mut v = c.clone();
            for (a, &e) in i.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if self.ctx.degree(a) != 0 {
                    continue 'terms;
                }
                v *= num_traits::pow(vals[a].clone(), e as usize);
            }
            total += v;
        }
        total
    }

    /// Splits `f = T + R` with `T` of order at most `q` in the shifted
    /// generators `z^A − z^A(a)` and `R` of order at least `q + 1`.
    pub fn taylor_split(&self, point: &Point, q: u32) -> Result<(Poly, Poly)> {
        let vals = point.values_for(&self.ctx)?;
        let neg: Vec<Rational> = vals.iter().map(|v| -v).collect();
        let shifted = self.shift(&vals);
        let t = shifted.truncate_weight(q).shift(&neg);
        let r = self - &t;
        Ok((t, r))
    }

    /// Order of vanishing at a point: the smallest weight in the shifted
    /// generators, `None` for zero.
    pub fn order_at(&self, point: &Point) -> Result<Option<u32>> {
        let vals = point.values_for(&self.ctx)?;
        Ok(self.shift(&vals).min_weight())
    }
}

/// `Σ_{K≤I} binom(I,K) (−1)^{σ(I,K)+|f||z^{I−K}|} (∂^op_K f)(∂^op_{I−K} g)`.
pub fn leibniz_multi(index: &MultiIndex, f: &Poly, g: &Poly) -> Result<Poly> {
    f.check_ctx(g)?;
    let ctx = f.ctx().clone();
    ctx.check_index(index)?;
    let df = match f.degree() {
        Some(d) => d,
        None if f.is_zero() => return Ok(Poly::zero(&ctx)),
        None => {
            return Err(Error::NotHomogeneous(
                "leibniz_multi needs homogeneous f".into(),
            ))
        }
    };
    let mut out = Poly::zero(&ctx);
    for k in index.sub_indices() {
        let rest = index.checked_sub(&k).expect("sub index");
        let b = index_binomial(index, &k)?;
        let neg = sigma_parity(&ctx, index, &k)? ^ parity(df * ctx.index_degree(&rest));
        let term = f.partial_op(&k)?.try_mul(&g.partial_op(&rest)?)?;
        out = &out + &term.scale(&Rational::from_integer(b)).signed(neg);
    }
    Ok(out)
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        self.try_add(rhs).expect("context mismatch")
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        assert!(same_ctx(&self.ctx, &rhs.ctx), "context mismatch");
        for (i, c) in &rhs.terms {
            self.add_term(i.clone(), c.clone());
        }
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        self.try_add(&-rhs).expect("context mismatch")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        self.try_mul(rhs).expect("context mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(i, c)| (i.clone(), -c)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

pub(crate) fn fmt_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_monomial(ctx: &CoordinateContext, i: &MultiIndex) -> String {
    let mut parts = Vec::new();
    for (a, &e) in i.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(ctx.name(a).to_string()),
            _ => parts.push(format!("{}^{}", ctx.name(a), e)),
        }
    }
    parts.join("*")
}

impl fmt::Display for Poly {
    /// Terms are printed with the lexicographically largest index first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (i, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            if n == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono = fmt_monomial(&self.ctx, i);
            if mono.is_empty() {
                write!(f, "{}", fmt_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else if mag.is_integer() {
                write!(f, "{}{mono}", fmt_rational(&mag))?;
            } else {
                write!(f, "{} {mono}", fmt_rational(&mag))?;
            }
        }
        Ok(())
    }
}

/// Values of degree-0 coordinates; missing ones are taken to be zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Point {
    pub values: BTreeMap<String, Rational>,
}

impl Point {
    pub fn new(values: impl IntoIterator<Item = (String, Rational)>) -> Self {
        Self {
            values: values.into_iter().collect(),
        }
    }

    pub fn origin() -> Self {
        Self::default()
    }

    /// Dense value vector in context order.
    pub fn values_for(&self, ctx: &CoordinateContext) -> Result<Vec<Rational>> {
        let mut out = vec![Rational::zero(); ctx.dim()];
        for (name, v) in &self.values {
            let a = ctx
                .position(name)
                .ok_or_else(|| Error::UnknownName(name.clone()))?;
            if ctx.degree(a) != 0 {
                return Err(Error::InvalidContext(format!(
                    "point assigns a value to `{name}` of nonzero degree"
                )));
            }
            out[a] = v.clone();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcore::{normalize_word, KoszulWord, Normalized};

    fn xtp() -> Ctx {
        CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("p", 2)]).unwrap()
    }

    fn mono(ctx: &Ctx, e: &[u32]) -> Poly {
        Poly::monomial(ctx, MultiIndex(e.to_vec()), int(1))
    }

    #[test]
    fn monomial_mul_agrees_with_word_sorting() {
        let ctx =
            CoordinateContext::from_pairs(&[("a", 1), ("x", 0), ("b", -1), ("p", 2), ("c", 3)])
                .unwrap();
        let all = crate::gcore::multi_indices_up_to(&ctx, 3);
        for i in &all {
            for j in &all {
                let mut letters = i.letters();
                letters.extend(j.letters());
                let want = normalize_word(&ctx, &KoszulWord { letters }).unwrap();
                let got = monomial_mul(&ctx, i, j);
                match (want, got) {
                    (Normalized::Zero, None) => {}
                    (Normalized::Term { negative, index }, Some((n, k))) => {
                        assert_eq!((negative, index), (n, k), "{i} * {j}");
                    }
                    (w, g) => panic!("{i} * {j}: {w:?} vs {g:?}"),
                }
            }
        }
    }

    #[test]
    fn product_examples() {
        let ctx = xtp();
        let x = Poly::var(&ctx, 0);
        let th = Poly::var(&ctx, 1);
        let p = Poly::var(&ctx, 2);
        assert!((&(&x * &th) * &th).is_zero());
        assert_eq!(&p * &th, mono(&ctx, &[0, 1, 1]));
        let odd = CoordinateContext::from_pairs(&[("θ1", 1), ("θ2", 1)]).unwrap();
        let t1 = Poly::var(&odd, 0);
        let t2 = Poly::var(&odd, 1);
        assert_eq!(&t2 * &t1, -mono(&odd, &[1, 1]));
    }

    #[test]
    fn derivative_examples() {
        let ctx = xtp();
        let x = Poly::var(&ctx, 0);
        let xt = mono(&ctx, &[1, 1, 0]);
        assert_eq!(xt.partial_left(1).unwrap(), x);
        assert_eq!(
            mono(&ctx, &[2, 0, 0]).partial_left(0).unwrap(),
            x.scale(&int(2))
        );
        assert!(Poly::var(&ctx, 2).partial_left(1).unwrap().is_zero());
        assert_eq!(xt.partial_right(1).unwrap(), x);
        for a in 0..3 {
            for b in 0..3 {
                let d = Poly::var(&ctx, b).partial_right(a).unwrap();
                let want = if a == b {
                    Poly::one(&ctx)
                } else {
                    Poly::zero(&ctx)
                };
                assert_eq!(d, want);
            }
        }
        assert_eq!(
            xt.partial_op(&MultiIndex(vec![1, 1, 0])).unwrap(),
            Poly::one(&ctx)
        );
        assert!(x.partial_op(&MultiIndex(vec![0, 1, 0])).unwrap().is_zero());
        assert!(x.partial_left(3).is_err());
    }

    #[test]
    fn leibniz_examples() {
        let ctx = xtp();
        let x = Poly::var(&ctx, 0);
        let th = Poly::var(&ctx, 1);
        let i = MultiIndex(vec![1, 0, 0]);
        assert_eq!(leibniz_multi(&i, &x, &x).unwrap(), x.scale(&int(2)));
        let i = MultiIndex(vec![1, 1, 0]);
        let direct = (&th * &x).partial_op(&i).unwrap();
        assert_eq!(leibniz_multi(&i, &th, &x).unwrap(), direct);
        assert_eq!(direct, Poly::one(&ctx));
        let z = MultiIndex::zero(3);
        assert_eq!(leibniz_multi(&z, &th, &x).unwrap(), &th * &x);
    }

    #[test]
    fn body_and_taylor() {
        let ctx = xtp();
        let x = Poly::var(&ctx, 0);
        let f = &(&x * &x) + &mono(&ctx, &[0, 1, 1]);
        let a = Point::new([("x".to_string(), int(3))]);
        assert_eq!(f.evaluate_body(&a).unwrap(), int(9));
        assert_eq!(Poly::var(&ctx, 1).evaluate_body(&a).unwrap(), int(0));
        assert_eq!(
            Poly::constant(&ctx, int(5)).evaluate_body(&a).unwrap(),
            int(5)
        );

        let a = Point::new([("x".to_string(), int(1))]);
        let x2 = &x * &x;
        let (t, r) = x2.taylor_split(&a, 1).unwrap();
        let one = Poly::one(&ctx);
        let xm1 = &x - &one;
        assert_eq!(t, &one + &xm1.scale(&int(2)));
        assert_eq!(r, &xm1 * &xm1);
        let (t, r) = Poly::var(&ctx, 1).taylor_split(&a, 0).unwrap();
        assert!(t.is_zero());
        assert_eq!(r, Poly::var(&ctx, 1));
        let (_, r) = x2.taylor_split(&a, 2).unwrap();
        assert!(r.is_zero());
        assert!(Poly::var(&ctx, 1)
            .evaluate_body(&Point::new([("θ".to_string(), int(1))]))
            .is_err());
    }

    #[test]
    fn printing() {
        let ctx = xtp();
        let x = Poly::var(&ctx, 0);
        assert_eq!((&x * &x).to_string(), "x^2");
        assert_eq!(x.scale(&int(-2)).to_string(), "-2x");
        let f = &mono(&ctx, &[1, 1, 0]).scale(&rat(3, 2)) - &Poly::one(&ctx);
        assert_eq!(f.to_string(), "3/2 x*θ - 1");
        assert_eq!(Poly::zero(&ctx).to_string(), "0");
    }
}
