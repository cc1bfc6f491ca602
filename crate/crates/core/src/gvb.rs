//! Graded vector bundles over a single chart, their sections, bundle maps and
//! symmetric forms and multivectors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::galg::{fmt_rational, same_ctx, Poly, Rational};
use crate::gcore::{parity, Coord, CoordinateContext, Ctx, MultiIndex};

/// Basis element `ϑ_λ` of the typical fiber.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiberElem {
    pub name: String,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleSpec {
    ctx: Ctx,
    fiber: Vec<FiberElem>,
}

pub type Bundle = Arc<BundleSpec>;

impl BundleSpec {
    pub fn new(ctx: &Ctx, fiber: Vec<FiberElem>) -> Result<Bundle> {
        let mut seen = BTreeSet::new();
        for e in &fiber {
            if e.name.is_empty() || !seen.insert(e.name.as_str()) {
                return Err(Error::BundleMismatch(format!(
                    "fiber names must be unique and nonempty, got `{}`",
                    e.name
                )));
            }
        }
        Ok(Arc::new(Self {
            ctx: ctx.clone(),
            fiber,
        }))
    }

    pub fn from_pairs(ctx: &Ctx, pairs: &[(&str, i64)]) -> Result<Bundle> {
        Self::new(
            ctx,
            pairs
                .iter()
                .map(|(n, d)| FiberElem {
                    name: (*n).to_string(),
                    degree: *d,
                })
                .collect(),
        )
    }

    /// Trivial line bundle with a degree-0 frame named `e`.
    pub fn line(ctx: &Ctx) -> Bundle {
        Self::from_pairs(ctx, &[("e", 0)]).expect("line bundle")
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn fiber(&self) -> &[FiberElem] {
        &self.fiber
    }

    pub fn rank(&self) -> usize {
        self.fiber.len()
    }

    pub fn fiber_degree(&self, l: usize) -> i64 {
        self.fiber[l].degree
    }

    pub fn fiber_name(&self, l: usize) -> &str {
        &self.fiber[l].name
    }

    pub fn fiber_position(&self, name: &str) -> Option<usize> {
        self.fiber.iter().position(|e| e.name == name)
    }

    pub fn graded_rank(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for e in &self.fiber {
            *out.entry(e.degree).or_insert(0) += 1;
        }
        out
    }
}

pub(crate) fn same_bundle(a: &Bundle, b: &Bundle) -> bool {
    Arc::ptr_eq(a, b) || (same_ctx(&a.ctx, &b.ctx) && a.fiber == b.fiber)
}

pub(crate) fn check_bundle(a: &Bundle, b: &Bundle) -> Result<()> {
    if same_bundle(a, b) {
        Ok(())
    } else {
        Err(Error::BundleMismatch(
            "operands live on different bundles".into(),
        ))
    }
}

/// Local section `ψ = ψ^λ · Φ_λ`.
#[derive(Clone, PartialEq, Eq)]
pub struct Section {
    bundle: Bundle,
    components: Vec<Poly>,
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Section({self})")
    }
}

impl Section {
    pub fn new(bundle: &Bundle, components: Vec<Poly>) -> Result<Self> {
        if components.len() != bundle.rank() {
            return Err(Error::BundleMismatch(format!(
                "expected {} components, got {}",
                bundle.rank(),
                components.len()
            )));
        }
        for c in &components {
            if !same_ctx(c.ctx(), bundle.ctx()) {
                return Err(Error::ContextMismatch);
            }
        }
        Ok(Self {
            bundle: bundle.clone(),
            components,
        })
    }

    pub fn zero(bundle: &Bundle) -> Self {
        Self {
            bundle: bundle.clone(),
            components: vec![Poly::zero(bundle.ctx()); bundle.rank()],
        }
    }

    /// `f · Φ_λ`.
    pub fn single(bundle: &Bundle, l: usize, f: Poly) -> Self {
        let mut s = Self::zero(bundle);
        s.components[l] = f;
        s
    }

    /// The frame section `Φ_λ`.
    pub fn frame(bundle: &Bundle, l: usize) -> Self {
        Self::single(bundle, l, Poly::one(bundle.ctx()))
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, l: usize) -> &Poly {
        &self.components[l]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_bundle(&self.bundle, &other.bundle)?;
        Ok(Self {
            bundle: self.bundle.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("bundle mismatch")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|p| -p)
    }

    pub fn signed(&self, negative: bool) -> Self {
        if negative {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        Self {
            bundle: self.bundle.clone(),
            components: self.components.iter().map(f).collect(),
        }
    }

    /// Module action `f · ψ`, componentwise `(f·ψ)^λ = f·ψ^λ`.
    pub fn act(&self, f: &Poly) -> Result<Self> {
        if !same_ctx(f.ctx(), self.bundle.ctx()) {
            return Err(Error::ContextMismatch);
        }
        Ok(self.map(|p| f * p))
    }

    /// Total degree when homogeneous and nonzero.
    pub fn degree(&self) -> Option<i64> {
        let mut d = None;
        for (l, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = c.degree()? + self.bundle.fiber_degree(l);
            match d {
                None => d = Some(e),
                Some(x) if x == e => {}
                Some(_) => return None,
            }
        }
        d
    }

    /// Checks `|ψ^λ| = d − |ϑ_λ|` for every nonzero component.
    pub fn is_homogeneous_of(&self, d: i64) -> bool {
        self.components
            .iter()
            .enumerate()
            .all(|(l, c)| c.is_homogeneous_of(d - self.bundle.fiber_degree(l)))
    }

    /// Homogeneous pieces keyed by total degree.
    pub fn pieces(&self) -> BTreeMap<i64, Section> {
        let mut out: BTreeMap<i64, Section> = BTreeMap::new();
        for (l, c) in self.components.iter().enumerate() {
            for (d, piece) in c.pieces() {
                let total = d + self.bundle.fiber_degree(l);
                let s = out
                    .entry(total)
                    .or_insert_with(|| Section::zero(&self.bundle));
                s.components[l] = &s.components[l] + &piece;
            }
        }
        out
    }
}

fn fmt_component(p: &Poly) -> String {
    if p.terms().len() > 1 {
        format!("({p})")
    } else {
        p.to_string()
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(l, c)| format!("{} · {}", fmt_component(c), self.bundle.fiber_name(l)))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// A homogeneous bundle map `F: E → E'` given by `F(Φ_λ) = F^κ_λ · Φ'_κ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleMap {
    pub source: Bundle,
    pub target: Bundle,
    pub degree: i64,
    /// `matrix[κ][λ] = F^κ_λ`.
    pub matrix: Vec<Vec<Poly>>,
}

impl BundleMap {
    pub fn new(
        source: &Bundle,
        target: &Bundle,
        degree: i64,
        matrix: Vec<Vec<Poly>>,
    ) -> Result<Self> {
        if !same_ctx(source.ctx(), target.ctx()) {
            return Err(Error::ContextMismatch);
        }
        if matrix.len() != target.rank() || matrix.iter().any(|row| row.len() != source.rank()) {
            return Err(Error::BundleMismatch(
                "bundle map matrix has the wrong shape".into(),
            ));
        }
        for (k, row) in matrix.iter().enumerate() {
            for (l, entry) in row.iter().enumerate() {
                let want = degree + source.fiber_degree(l) - target.fiber_degree(k);
                if !entry.is_homogeneous_of(want) {
                    return Err(Error::DegreeInconsistency(format!(
                        "bundle map entry ({}, {}) should have degree {want}",
                        target.fiber_name(k),
                        source.fiber_name(l)
                    )));
                }
            }
        }
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            degree,
            matrix,
        })
    }

    pub fn identity(bundle: &Bundle) -> Self {
        let r = bundle.rank();
        let ctx = bundle.ctx();
        let matrix = (0..r)
            .map(|k| {
                (0..r)
                    .map(|l| {
                        if k == l {
                            Poly::one(ctx)
                        } else {
                            Poly::zero(ctx)
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            source: bundle.clone(),
            target: bundle.clone(),
            degree: 0,
            matrix,
        }
    }

    /// Multiplication by a homogeneous function on every fiber.
    pub fn scalar(bundle: &Bundle, g: &Poly) -> Result<Self> {
        let degree = g.degree().unwrap_or(0);
        let mut m = Self::identity(bundle);
        m.degree = degree;
        for k in 0..bundle.rank() {
            m.matrix[k][k] = g.clone();
        }
        Self::new(bundle, bundle, degree, m.matrix)
    }

    /// `F(ψ)^κ = Σ_λ (−1)^{|F||ψ^λ|} ψ^λ · F^κ_λ`.
    pub fn apply(&self, psi: &Section) -> Result<Section> {
        check_bundle(&self.source, psi.bundle())?;
        let mut out = Section::zero(&self.target);
        for (l, c) in psi.components().iter().enumerate() {
            for (d, piece) in c.pieces() {
                let neg = parity(self.degree * d);
                for k in 0..self.target.rank() {
                    let term = (&piece * &self.matrix[k][l]).signed(neg);
                    out.components[k] = &out.components[k] + &term;
                }
            }
        }
        Ok(out)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &BundleMap) -> Result<BundleMap> {
        check_bundle(&other.target, &self.source)?;
        let ctx = self.source.ctx();
        let mut matrix = vec![vec![Poly::zero(ctx); other.source.rank()]; self.target.rank()];
        for l in 0..other.source.rank() {
            let image = self.apply(&other.apply(&Section::frame(&other.source, l))?)?;
            for (k, row) in matrix.iter_mut().enumerate() {
                row[l] = image.component(k).clone();
            }
        }
        BundleMap::new(
            &other.source,
            &self.target,
            self.degree + other.degree,
            matrix,
        )
    }
}

/// Whether a symmetric tensor is a form or a multivector field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Form,
    Multivector,
}

/// Symmetric form `Σ (1/I!) ω_I dz^I` or multivector `Σ X^I ∂^op_I`, with
/// coefficients stored to the left of the frame symbols.
#[derive(Clone, PartialEq, Eq)]
pub struct SymTensor {
    ctx: Ctx,
    arity: u32,
    variance: Variance,
    coeffs: BTreeMap<MultiIndex, Poly>,
}

impl fmt::Debug for SymTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymTensor({self})")
    }
}

/// Context `(z^1,…,z^n, w_1,…,w_n)` in which symmetric tensors become
/// graded-commutative polynomials; `w_A` stands for `dz^A` (degree `|z^A|`)
/// or `∂_A` (degree `−|z^A|`).
fn extended_ctx(ctx: &CoordinateContext, variance: Variance) -> Ctx {
    let mut coords: Vec<Coord> = ctx.coords().to_vec();
    for (a, c) in ctx.coords().iter().enumerate() {
        let degree = match variance {
            Variance::Form => c.degree,
            Variance::Multivector => -c.degree,
        };
        coords.push(Coord {
            name: format!("ξ#{a}"),
            degree,
        });
    }
    Arc::new(CoordinateContext::with_degree_bound(coords, i64::MAX).expect("extended context"))
}

/// Sign relating `∂_n^{i_n} ⋯ ∂_1^{i_1}` to the context-ordered product.
fn reversal_negative(ctx: &CoordinateContext, i: &MultiIndex) -> bool {
    let m: u32 = (0..ctx.dim())
        .filter(|&a| ctx.is_odd(a))
        .map(|a| i.0[a])
        .sum();
    (m * m.saturating_sub(1) / 2) % 2 == 1
}

fn split_index(n: usize, k: &MultiIndex) -> (MultiIndex, MultiIndex) {
    (MultiIndex(k.0[..n].to_vec()), MultiIndex(k.0[n..].to_vec()))
}

impl SymTensor {
    pub fn zero(ctx: &Ctx, arity: u32, variance: Variance) -> Self {
        Self {
            ctx: ctx.clone(),
            arity,
            variance,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn new(
        ctx: &Ctx,
        arity: u32,
        variance: Variance,
        coeffs: impl IntoIterator<Item = (MultiIndex, Poly)>,
    ) -> Result<Self> {
        let mut t = Self::zero(ctx, arity, variance);
        for (i, c) in coeffs {
            ctx.check_index(&i)?;
            if i.weight() != arity {
                return Err(Error::ArityMismatch(format!(
                    "index {i} does not have weight {arity}"
                )));
            }
            if !same_ctx(c.ctx(), ctx) {
                return Err(Error::ContextMismatch);
            }
            t.add_coeff(i, &c);
        }
        Ok(t)
    }

    /// A function viewed as a tensor of arity 0.
    pub fn function(f: &Poly, variance: Variance) -> Self {
        let ctx = f.ctx();
        Self::new(ctx, 0, variance, [(MultiIndex::zero(ctx.dim()), f.clone())]).expect("function")
    }

    /// The coordinate vector field `∂_A`.
    pub fn coordinate_field(ctx: &Ctx, a: usize) -> Self {
        Self::new(
            ctx,
            1,
            Variance::Multivector,
            [(MultiIndex::unit(ctx.dim(), a), Poly::one(ctx))],
        )
        .expect("coordinate field")
    }

    /// The frame form `dz^I`, i.e. coefficient `ω_I = I!`.
    pub fn frame_form(ctx: &Ctx, i: &MultiIndex) -> Self {
        let c = Poly::constant(ctx, Rational::from_integer(i.factorial()));
        Self::new(ctx, i.weight(), Variance::Form, [(i.clone(), c)]).expect("frame form")
    }

    /// The frame multivector `∂^op_I`.
    pub fn frame_multivector(ctx: &Ctx, i: &MultiIndex) -> Self {
        Self::new(
            ctx,
            i.weight(),
            Variance::Multivector,
            [(i.clone(), Poly::one(ctx))],
        )
        .expect("frame multivector")
    }

    /// `df`, whose coefficients `(df)_A = (−1)^{|f|(1+|z^A|)} ∂f/∂z^A` are
    /// fixed by the frame pairing and the vector-field action on functions.
    pub fn differential(f: &Poly) -> Result<Self> {
        let ctx = f.ctx();
        let mut t = Self::zero(ctx, 1, Variance::Form);
        for (d, piece) in f.pieces() {
            for a in 0..ctx.dim() {
                let c = piece
                    .partial_left(a)?
                    .signed(parity(d * (1 + ctx.degree(a))));
                t.add_coeff(MultiIndex::unit(ctx.dim(), a), &c);
            }
        }
        Ok(t)
    }

    fn add_coeff(&mut self, i: MultiIndex, c: &Poly) {
        let e = self
            .coeffs
            .entry(i.clone())
            .or_insert_with(|| Poly::zero(&self.ctx));
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, Poly> {
        &self.coeffs
    }

    pub fn coeff(&self, i: &MultiIndex) -> Poly {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| Poly::zero(&self.ctx))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn frame_degree(&self, i: &MultiIndex) -> i64 {
        match self.variance {
            Variance::Form => self.ctx.index_degree(i),
            Variance::Multivector => -self.ctx.index_degree(i),
        }
    }

    /// Total degree when homogeneous and nonzero.
    pub fn degree(&self) -> Option<i64> {
        let mut d = None;
        for (i, c) in &self.coeffs {
            let e = c.degree()? + self.frame_degree(i);
            match d {
                None => d = Some(e),
                Some(x) if x == e => {}
                Some(_) => return None,
            }
        }
        d
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.arity != other.arity {
            return Err(Error::ArityMismatch(format!(
                "{} vs {}",
                self.arity, other.arity
            )));
        }
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_coeff(i.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(i, c)| (i.clone(), -c)).collect(),
            ..self.clone()
        }
    }

    pub fn signed(&self, negative: bool) -> Self {
        if negative {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(&self.ctx, self.arity, self.variance);
        for (i, p) in &self.coeffs {
            out.add_coeff(i.clone(), &p.scale(c));
        }
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return Err(Error::ContextMismatch);
        }
        if self.variance != other.variance {
            return Err(Error::ArityMismatch("form and multivector mixed".into()));
        }
        Ok(())
    }

    /// Image in the extended polynomial algebra.
    pub(crate) fn to_extended(&self, ext: &Ctx) -> Poly {
        let mut out = Poly::zero(ext);
        for (i, c) in &self.coeffs {
            let (factor, negative) = match self.variance {
                Variance::Form => (
                    Rational::one() / Rational::from_integer(i.factorial()),
                    false,
                ),
                Variance::Multivector => (Rational::one(), reversal_negative(&self.ctx, i)),
            };
            for (j, v) in c.terms() {
                let mut e = j.0.clone();
                e.extend_from_slice(&i.0);
                let coeff = v * &factor;
                out.add_term(MultiIndex(e), if negative { -coeff } else { coeff });
            }
        }
        out
    }

    pub(crate) fn from_extended(ctx: &Ctx, variance: Variance, p: &Poly) -> Result<Self> {
        let n = ctx.dim();
        let mut by_index: BTreeMap<MultiIndex, Poly> = BTreeMap::new();
        let mut arity = None;
        for (k, v) in p.terms() {
            let (j, i) = split_index(n, k);
            let w = i.weight();
            if *arity.get_or_insert(w) != w {
                return Err(Error::ArityMismatch("mixed arities".into()));
            }
            let (factor, negative) = match variance {
                Variance::Form => (Rational::from_integer(i.factorial()), false),
                Variance::Multivector => (Rational::one(), reversal_negative(ctx, &i)),
            };
            let c = v * &factor;
            by_index
                .entry(i)
                .or_insert_with(|| Poly::zero(ctx))
                .add_term(j, if negative { -c } else { c });
        }
        Self::new(ctx, arity.unwrap_or(0), variance, by_index)
    }

    pub(crate) fn extended_ctx(&self) -> Ctx {
        extended_ctx(&self.ctx, self.variance)
    }

    /// The symmetric product `s ⊙ t`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let ext = self.extended_ctx();
        let p = &self.to_extended(&ext) * &other.to_extended(&ext);
        let mut out = Self::from_extended(&self.ctx, self.variance, &p)?;
        out.arity = self.arity + other.arity;
        Ok(out)
    }

    /// Interior product `j_ω X = Σ_A ω_A · ∂X/∂w_A` of a 1-form with a
    /// multivector.
    pub fn interior(omega: &SymTensor, x: &SymTensor) -> Result<SymTensor> {
        if !same_ctx(&omega.ctx, &x.ctx) {
            return Err(Error::ContextMismatch);
        }
        if omega.variance != Variance::Form || omega.arity != 1 {
            return Err(Error::ArityMismatch(
                "interior product needs a 1-form".into(),
            ));
        }
        if x.variance != Variance::Multivector || x.arity == 0 {
            return Err(Error::ArityMismatch(
                "interior product needs a multivector of arity ≥ 1".into(),
            ));
        }
        let ctx = &x.ctx;
        let n = ctx.dim();
        let ext = x.extended_ctx();
        let xe = x.to_extended(&ext);
        let mut out = Poly::zero(&ext);
        for a in 0..n {
            let wa = omega.coeff(&MultiIndex::unit(n, a));
            if wa.is_zero() {
                continue;
            }
            let lifted = lift(&wa, &ext);
            out += &(&lifted * &xe.partial_left(n + a)?);
        }
        let mut t = Self::from_extended(ctx, Variance::Multivector, &out)?;
        t.arity = x.arity - 1;
        Ok(t)
    }

    /// Applies a vector field to a function: `X(f) = Σ_A X^A ∂f/∂z^A`.
    pub fn apply_vector_field(&self, f: &Poly) -> Result<Poly> {
        if self.variance != Variance::Multivector || self.arity != 1 {
            return Err(Error::ArityMismatch("expected a vector field".into()));
        }
        let n = self.ctx.dim();
        let mut out = Poly::zero(&self.ctx);
        for a in 0..n {
            let xa = self.coeff(&MultiIndex::unit(n, a));
            if !xa.is_zero() {
                out += &(&xa * &f.partial_left(a)?);
            }
        }
        Ok(out)
    }
}

/// Embeds a function on the base into the extended context.
pub(crate) fn lift(f: &Poly, ext: &Ctx) -> Poly {
    let extra = ext.dim() - f.ctx().dim();
    let mut out = Poly::zero(ext);
    for (i, c) in f.terms() {
        let mut e = i.0.clone();
        e.extend(std::iter::repeat_n(0, extra));
        out.add_term(MultiIndex(e), c.clone());
    }
    out
}

/// Frame pairing `ω(X) = Σ_I (−1)^{|X^I||z^I|} ω_I X^I`, normalized so that
/// `dz^I(∂^op_J) = I! δ^I_J`.
pub fn sym_pair(omega: &SymTensor, x: &SymTensor) -> Result<Poly> {
    if !same_ctx(&omega.ctx, &x.ctx) {
        return Err(Error::ContextMismatch);
    }
    if omega.variance != Variance::Form || x.variance != Variance::Multivector {
        return Err(Error::ArityMismatch(
            "pairing needs a form and a multivector".into(),
        ));
    }
    if omega.arity != x.arity {
        return Err(Error::ArityMismatch(format!(
            "{} vs {}",
            omega.arity, x.arity
        )));
    }
    let ctx = &x.ctx;
    let mut out = Poly::zero(ctx);
    for (i, w) in &omega.coeffs {
        let Some(xi) = x.coeffs.get(i) else { continue };
        let zi = ctx.index_degree(i);
        for (d, piece) in xi.pieces() {
            out += &(w * &piece).signed(parity(d * zi));
        }
    }
    Ok(out)
}

pub(crate) fn fmt_frame(ctx: &CoordinateContext, variance: Variance, i: &MultiIndex) -> String {
    let prefix = match variance {
        Variance::Form => "d",
        Variance::Multivector => "∂",
    };
    let mut parts = Vec::new();
    let order: Vec<usize> = match variance {
        Variance::Form => (0..ctx.dim()).collect(),
        Variance::Multivector => (0..ctx.dim()).rev().collect(),
    };
    for a in order {
        match i.0[a] {
            0 => {}
            1 => parts.push(format!("{prefix}{}", ctx.name(a))),
            e => parts.push(format!("{prefix}{}^{e}", ctx.name(a))),
        }
    }
    parts.join("⊙")
}

impl fmt::Display for SymTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .rev()
            .map(|(i, c)| {
                if i.is_zero() {
                    c.to_string()
                } else {
                    format!(
                        "{} · {}",
                        fmt_component(c),
                        fmt_frame(&self.ctx, self.variance, i)
                    )
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Compact printing of a rational for tables.
pub fn fmt_q(c: &Rational) -> String {
    if c.is_zero() {
        "0".into()
    } else {
        fmt_rational(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galg::int;
    use crate::gcore::multi_indices;

    fn xtp() -> Ctx {
        CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("p", 2)]).unwrap()
    }

    #[test]
    fn section_action_examples() {
        let ctx = xtp();
        let b = BundleSpec::from_pairs(&ctx, &[("e0", 0), ("e1", 1)]).unwrap();
        let th = Poly::var(&ctx, 1);
        let psi = Section::single(&b, 0, th.clone());
        assert_eq!(psi.act(&Poly::one(&ctx)).unwrap(), psi);
        assert!(psi.act(&th).unwrap().is_zero());
        let x = Poly::var(&ctx, 0);
        assert_eq!(
            Section::frame(&b, 1).act(&x).unwrap(),
            Section::single(&b, 1, x.clone())
        );
        assert_eq!(Section::frame(&b, 1).act(&x).unwrap().to_string(), "x · e1");
        assert_eq!(Section::single(&b, 1, x.clone()).degree(), Some(1));
        assert!(Section::single(&b, 1, x.clone()).is_homogeneous_of(1));
    }

    #[test]
    fn pairing_is_diagonal_on_frames() {
        for ctx in [
            xtp(),
            CoordinateContext::from_pairs(&[("θ1", 1), ("θ2", 1)]).unwrap(),
            CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("η", -1)]).unwrap(),
        ] {
            for k in 0..=3 {
                let idx = multi_indices(&ctx, k);
                for i in &idx {
                    for j in &idx {
                        let v = sym_pair(
                            &SymTensor::frame_form(&ctx, i),
                            &SymTensor::frame_multivector(&ctx, j),
                        )
                        .unwrap();
                        let want = if i == j {
                            Poly::constant(&ctx, Rational::from_integer(i.factorial()))
                        } else {
                            Poly::zero(&ctx)
                        };
                        assert_eq!(v, want, "{i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn product_examples() {
        let ctx = xtp();
        let dx = SymTensor::differential(&Poly::var(&ctx, 0)).unwrap();
        let dth = SymTensor::differential(&Poly::var(&ctx, 1)).unwrap();
        assert!(dth.product(&dth).unwrap().is_zero());
        assert_eq!(dx.product(&dth).unwrap(), dth.product(&dx).unwrap());
        assert_eq!(
            dx.product(&dth).unwrap().coeffs().keys().next().unwrap().0,
            vec![1, 1, 0]
        );
        let dx2 = dx.product(&dx).unwrap();
        assert_eq!(dx.product(&dx2).unwrap().arity(), 3);
        assert_eq!(dx2, SymTensor::frame_form(&ctx, &MultiIndex(vec![2, 0, 0])));
    }

    #[test]
    fn interior_examples() {
        let ctx = xtp();
        let dx = SymTensor::differential(&Poly::var(&ctx, 0)).unwrap();
        let dth = SymTensor::differential(&Poly::var(&ctx, 1)).unwrap();
        let px = SymTensor::coordinate_field(&ctx, 0);
        assert_eq!(
            SymTensor::interior(&dx, &px).unwrap(),
            SymTensor::function(&Poly::one(&ctx), Variance::Multivector)
        );
        assert_eq!(
            SymTensor::interior(&dx, &px.product(&px).unwrap()).unwrap(),
            px.scale(&int(2))
        );
        assert!(SymTensor::interior(&dth, &px).unwrap().is_zero());
        assert!(SymTensor::interior(
            &dx,
            &SymTensor::function(&Poly::one(&ctx), Variance::Multivector)
        )
        .is_err());
    }

    #[test]
    fn bundle_map_composition() {
        let ctx = xtp();
        let b = BundleSpec::from_pairs(&ctx, &[("e0", 0), ("e1", 1)]).unwrap();
        let th = Poly::var(&ctx, 1);
        let z = Poly::zero(&ctx);
        let f = BundleMap::new(
            &b,
            &b,
            1,
            vec![vec![z.clone(), z.clone()], vec![Poly::one(&ctx), z.clone()]],
        )
        .unwrap();
        let g = BundleMap::scalar(&b, &th).unwrap();
        let gf = g.compose(&f).unwrap();
        let psi = Section::new(&b, vec![Poly::var(&ctx, 2), th.clone()]).unwrap();
        assert_eq!(
            gf.apply(&psi).unwrap(),
            g.apply(&f.apply(&psi).unwrap()).unwrap()
        );
    }
}
