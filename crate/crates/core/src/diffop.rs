//! Differential operators stored as coefficient tables in the canonical frame.
//!
//! An operator of order `k` from `E` to `E'` is kept as the table
//! `[D^I]^μ_λ` with `w(I) ≤ k`, and acts by
//!
//! ```text
//! D(ψ)^μ = Σ (1/I!) [D^I]^μ_λ · (−1)^{(|ϑ_μ|−|ϑ_λ|)(|ψ^λ|−|z^I|)} ∂^op_I ψ^λ .
//! ```
//!
//! Black-box linear maps are turned into tables by [`extract_coeffs`], which
//! probes iterated commutators with multiplication operators.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::One;

use crate::error::{Error, OrderWitness, Result};
use crate::galg::{monomial_mul, same_ctx, Poly, Rational};
use crate::gcore::{multi_indices, multi_indices_up_to, parity, MultiIndex};
use crate::gvb::{check_bundle, same_bundle, Bundle, BundleMap, Section};

/// A graded `R`-linear map between section spaces.
pub trait LinearMap {
    fn source(&self) -> &Bundle;
    fn target(&self) -> &Bundle;
    fn degree(&self) -> i64;
    fn apply(&self, psi: &Section) -> Result<Section>;
}

/// A linear map given by a closure.
pub struct FnMap<F> {
    source: Bundle,
    target: Bundle,
    degree: i64,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&Section) -> Result<Section>,
{
    pub fn new(source: &Bundle, target: &Bundle, degree: i64, f: F) -> Self {
        Self {
            source: source.clone(),
            target: target.clone(),
            degree,
            f,
        }
    }
}

impl<F> LinearMap for FnMap<F>
where
    F: Fn(&Section) -> Result<Section>,
{
    fn source(&self) -> &Bundle {
        &self.source
    }

    fn target(&self) -> &Bundle {
        &self.target
    }

    fn degree(&self) -> i64 {
        self.degree
    }

    fn apply(&self, psi: &Section) -> Result<Section> {
        (self.f)(psi)
    }
}

/// Degree of a homogeneous function; zero counts as degree 0.
pub(crate) fn hom_degree(f: &Poly) -> Result<i64> {
    if f.is_zero() {
        return Ok(0);
    }
    f.degree()
        .ok_or_else(|| Error::NotHomogeneous(format!("`{f}` is not homogeneous")))
}

/// `(I, μ, λ)`: multi-index, target fiber, source fiber.
pub type CoeffKey = (MultiIndex, usize, usize);

#[derive(Clone)]
pub struct DiffOperator {
    source: Bundle,
    target: Bundle,
    order: u32,
    degree: i64,
    coeffs: BTreeMap<CoeffKey, Poly>,
}

impl PartialEq for DiffOperator {
    /// Table equality; the declared order is not part of the operator.
    fn eq(&self, other: &Self) -> bool {
        same_bundle(&self.source, &other.source)
            && same_bundle(&self.target, &other.target)
            && self.coeffs == other.coeffs
            && (self.coeffs.is_empty() || self.degree == other.degree)
    }
}

impl Eq for DiffOperator {}

impl fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DiffOperator(order {}, degree {}; {self})",
            self.order, self.degree
        )
    }
}

impl DiffOperator {
    pub fn zero(source: &Bundle, target: &Bundle, order: u32, degree: i64) -> Self {
        Self {
            source: source.clone(),
            target: target.clone(),
            order,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn new(
        source: &Bundle,
        target: &Bundle,
        order: u32,
        degree: i64,
        coeffs: impl IntoIterator<Item = (CoeffKey, Poly)>,
    ) -> Result<Self> {
        if !same_ctx(source.ctx(), target.ctx()) {
            return Err(Error::ContextMismatch);
        }
        let ctx = source.ctx();
        let mut op = Self::zero(source, target, order, degree);
        for ((i, mu, l), c) in coeffs {
            ctx.check_index(&i)?;
            if i.weight() > order {
                return Err(Error::OrderMismatch(format!(
                    "coefficient at {i} exceeds declared order {order}"
                )));
            }
            if mu >= target.rank() {
                return Err(Error::BadFiber(mu));
            }
            if l >= source.rank() {
                return Err(Error::BadFiber(l));
            }
            if !same_ctx(c.ctx(), ctx) {
                return Err(Error::ContextMismatch);
            }
            let want = op.coeff_degree(&i, mu, l);
            if !c.is_homogeneous_of(want) {
                return Err(Error::DegreeInconsistency(format!(
                    "coefficient [{i}] {}←{} = {c} should have degree {want}",
                    target.fiber_name(mu),
                    source.fiber_name(l)
                )));
            }
            op.add_coeff((i, mu, l), &c);
        }
        Ok(op)
    }

    pub fn endo(
        bundle: &Bundle,
        order: u32,
        degree: i64,
        coeffs: impl IntoIterator<Item = (CoeffKey, Poly)>,
    ) -> Result<Self> {
        Self::new(bundle, bundle, order, degree, coeffs)
    }

    pub fn identity(bundle: &Bundle) -> Self {
        let z = MultiIndex::zero(bundle.ctx().dim());
        let one = Poly::one(bundle.ctx());
        Self::endo(
            bundle,
            0,
            0,
            (0..bundle.rank()).map(|l| ((z.clone(), l, l), one.clone())),
        )
        .expect("identity")
    }

    /// The multiplication operator `λ_f`.
    pub fn multiplication(bundle: &Bundle, f: &Poly) -> Result<Self> {
        let d = hom_degree(f)?;
        let z = MultiIndex::zero(bundle.ctx().dim());
        Self::endo(
            bundle,
            0,
            d,
            (0..bundle.rank()).map(|l| ((z.clone(), l, l), f.clone())),
        )
    }

    /// Componentwise coordinate derivative `ψ^λ Φ_λ ↦ (∂_A ψ^λ) Φ_λ`.
    pub fn coordinate_derivative(bundle: &Bundle, a: usize) -> Result<Self> {
        let ctx = bundle.ctx();
        if a >= ctx.dim() {
            return Err(Error::BadCoordinate(a));
        }
        let e = MultiIndex::unit(ctx.dim(), a);
        let one = Poly::one(ctx);
        Self::endo(
            bundle,
            1,
            -ctx.degree(a),
            (0..bundle.rank()).map(|l| ((e.clone(), l, l), one.clone())),
        )
    }

    /// The frame operator `𝔓_I^λ_μ`, whose only coefficient is `I!` at `(I, μ, λ)`.
    pub fn frame_operator(bundle: &Bundle, i: &MultiIndex, l: usize, mu: usize) -> Result<Self> {
        let ctx = bundle.ctx();
        ctx.check_index(i)?;
        if l >= bundle.rank() {
            return Err(Error::BadFiber(l));
        }
        if mu >= bundle.rank() {
            return Err(Error::BadFiber(mu));
        }
        let degree = bundle.fiber_degree(mu) - bundle.fiber_degree(l) - ctx.index_degree(i);
        let c = Poly::constant(ctx, Rational::from_integer(i.factorial()));
        Self::endo(bundle, i.weight(), degree, [((i.clone(), mu, l), c)])
    }

    /// Degree required of `[D^I]^μ_λ`.
    pub fn coeff_degree(&self, i: &MultiIndex, mu: usize, l: usize) -> i64 {
        self.degree + self.source.ctx().index_degree(i) + self.source.fiber_degree(l)
            - self.target.fiber_degree(mu)
    }

    fn add_coeff(&mut self, key: CoeffKey, c: &Poly) {
        if c.is_zero() {
            return;
        }
        let e = self
            .coeffs
            .entry(key.clone())
            .or_insert_with(|| Poly::zero(self.source.ctx()));
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn source(&self) -> &Bundle {
        &self.source
    }

    pub fn target(&self) -> &Bundle {
        &self.target
    }

    /// The bundle of an endomorphism-type operator.
    pub fn bundle(&self) -> &Bundle {
        &self.source
    }

    pub fn is_endo(&self) -> bool {
        same_bundle(&self.source, &self.target)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn coeffs(&self) -> &BTreeMap<CoeffKey, Poly> {
        &self.coeffs
    }

    pub fn coeff(&self, i: &MultiIndex, mu: usize, l: usize) -> Poly {
        self.coeffs
            .get(&(i.clone(), mu, l))
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.source.ctx()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest weight carrying a nonzero coefficient.
    pub fn effective_order(&self) -> Option<u32> {
        self.coeffs.keys().map(|(i, _, _)| i.weight()).max()
    }

    /// Re-declares the order, which must bound the effective order.
    pub fn with_order(&self, order: u32) -> Result<Self> {
        if self.effective_order().is_some_and(|e| e > order) {
            return Err(Error::OrderMismatch(format!(
                "effective order {} exceeds {order}",
                self.effective_order().unwrap_or(0)
            )));
        }
        Ok(Self {
            order,
            ..self.clone()
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_bundle(&self.source, &other.source)?;
        check_bundle(&self.target, &other.target)?;
        if !self.is_zero() && !other.is_zero() && self.degree != other.degree {
            return Err(Error::DegreeInconsistency(format!(
                "cannot add operators of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        let degree = if self.is_zero() {
            other.degree
        } else {
            self.degree
        };
        let mut out = Self {
            order: self.order.max(other.order),
            degree,
            ..self.clone()
        };
        for (k, c) in &other.coeffs {
            out.add_coeff(k.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect(),
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
        let mut out = Self {
            coeffs: BTreeMap::new(),
            ..self.clone()
        };
        for (k, p) in &self.coeffs {
            out.add_coeff(k.clone(), &p.scale(c));
        }
        out
    }

    /// `f · D` as a table: every coefficient is multiplied by `f` on the left.
    pub fn mul_left(&self, f: &Poly) -> Result<Self> {
        let d = hom_degree(f)?;
        let mut out = Self {
            coeffs: BTreeMap::new(),
            degree: self.degree + d,
            ..self.clone()
        };
        for (k, p) in &self.coeffs {
            out.add_coeff(k.clone(), &(f * p));
        }
        Ok(out)
    }

    /// Evaluates the frame decomposition on a section.
    pub fn apply(&self, psi: &Section) -> Result<Section> {
        check_bundle(&self.source, psi.bundle())?;
        let ctx = self.source.ctx();
        let mut out = Section::zero(&self.target).components().to_vec();
        // group by (I, λ) so that each derivative is computed once
        let mut derivs: HashMap<(MultiIndex, usize), Vec<(i64, Poly)>> = HashMap::new();
        for ((i, mu, l), c) in &self.coeffs {
            let pieces = match derivs.entry((i.clone(), *l)) {
                std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::hash_map::Entry::Vacant(v) => {
                    let mut ps = Vec::new();
                    for (d, piece) in psi.component(*l).pieces() {
                        let dp = piece.partial_op(i)?;
                        if !dp.is_zero() {
                            ps.push((d, dp));
                        }
                    }
                    v.insert(ps)
                }
            };
            if pieces.is_empty() {
                continue;
            }
            let shift = self.target.fiber_degree(*mu) - self.source.fiber_degree(*l);
            let scale = Rational::one() / Rational::from_integer(i.factorial());
            let zi = ctx.index_degree(i);
            let cs = c.scale(&scale);
            for (d, dp) in pieces.iter() {
                let neg = parity(shift * (d - zi));
                out[*mu] += &(&cs * dp).signed(neg);
            }
        }
        Section::new(&self.target, out)
    }
}

impl LinearMap for DiffOperator {
    fn source(&self) -> &Bundle {
        &self.source
    }

    fn target(&self) -> &Bundle {
        &self.target
    }

    fn degree(&self) -> i64 {
        self.degree
    }

    fn apply(&self, psi: &Section) -> Result<Section> {
        DiffOperator::apply(self, psi)
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((i, mu, l), c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(
                f,
                "[D^{i}]^{}_{} = {c}",
                self.target.fiber_name(*mu),
                self.source.fiber_name(*l)
            )?;
        }
        Ok(())
    }
}

/// `D^{(j)}_{(f_1,…,f_j)}(ψ)` with `D^{(j)} = [D^{(j−1)}, λ_{f_j}]`.
pub fn iterated_left(map: &dyn LinearMap, fs: &[Poly], psi: &Section) -> Result<Section> {
    let Some((last, rest)) = fs.split_last() else {
        return map.apply(psi);
    };
    let mut inner_deg = map.degree();
    for f in rest {
        inner_deg += hom_degree(f)?;
    }
    let df = hom_degree(last)?;
    let a = iterated_left(map, rest, &psi.act(last)?)?;
    let b = iterated_left(map, rest, psi)?.act(last)?;
    Ok(a.sub(&b.signed(parity(inner_deg * df))))
}

/// `D̄^{(j)}_{(f_1,…,f_j)}(ψ) = [λ_{f_1}, [… [λ_{f_j}, D] …]](ψ)`.
pub fn iterated_right(map: &dyn LinearMap, fs: &[Poly], psi: &Section) -> Result<Section> {
    let Some((first, rest)) = fs.split_first() else {
        return map.apply(psi);
    };
    let mut inner_deg = map.degree();
    for f in rest {
        inner_deg += hom_degree(f)?;
    }
    let df = hom_degree(first)?;
    let a = iterated_right(map, rest, psi)?.act(first)?;
    let b = iterated_right(map, rest, &psi.act(first)?)?;
    Ok(a.sub(&b.signed(parity(inner_deg * df))))
}

/// Which nesting of iterated commutators to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// `[[D, λ_{f_1}], …, λ_{f_j}]`
    Left,
    /// `[λ_{f_1}, […, [λ_{f_j}, D]]]`
    Right,
}

/// The iterated commutator as an operator of order `max(k − j, 0)`.
pub fn iterated_bracket(d: &DiffOperator, fs: &[Poly], flavor: Flavor) -> Result<DiffOperator> {
    let mut degree = d.degree;
    for f in fs {
        degree += hom_degree(f)?;
    }
    let order = d.order.saturating_sub(fs.len() as u32);
    let oracle = FnMap::new(&d.source, &d.target, degree, |psi: &Section| match flavor {
        Flavor::Left => iterated_left(d, fs, psi),
        Flavor::Right => iterated_right(d, fs, psi),
    });
    extract_coeffs(&oracle, order)
}

/// `[D, λ_f] = D∘λ_f − (−1)^{|D||f|} λ_f∘D`.
pub fn bracket_mult(d: &DiffOperator, f: &Poly) -> Result<DiffOperator> {
    iterated_bracket(d, std::slice::from_ref(f), Flavor::Left)
}

/// Iterated left commutators with coordinate monomials applied to
/// `z^{mono}·Φ_ρ`, with every oracle value memoized.
struct Prober<'a> {
    oracle: &'a dyn LinearMap,
    cache: HashMap<(MultiIndex, usize), Section>,
}

impl<'a> Prober<'a> {
    fn new(oracle: &'a dyn LinearMap) -> Self {
        Self {
            oracle,
            cache: HashMap::new(),
        }
    }

    fn base(&mut self, mono: &MultiIndex, rho: usize) -> Result<Section> {
        if let Some(s) = self.cache.get(&(mono.clone(), rho)) {
            return Ok(s.clone());
        }
        let src = self.oracle.source();
        let ctx = src.ctx();
        let input = Section::single(src, rho, Poly::monomial(ctx, mono.clone(), Rational::one()));
        let out = self.oracle.apply(&input)?;
        check_bundle(self.oracle.target(), out.bundle())?;
        self.cache.insert((mono.clone(), rho), out.clone());
        Ok(out)
    }

    /// `D^{(j)}_{(z^{A_1},…,z^{A_j})}(z^{mono} Φ_ρ)`.
    fn bracket(&mut self, letters: &[usize], mono: &MultiIndex, rho: usize) -> Result<Section> {
        let Some((&last, rest)) = letters.split_last() else {
            return self.base(mono, rho);
        };
        let ctx = self.oracle.source().ctx().clone();
        let n = ctx.dim();
        let inner_deg = self.oracle.degree() + rest.iter().map(|&a| ctx.degree(a)).sum::<i64>();
        let mut out = match monomial_mul(&ctx, &MultiIndex::unit(n, last), mono) {
            Some((neg, k)) => self.bracket(rest, &k, rho)?.signed(neg),
            None => Section::zero(self.oracle.target()),
        };
        let b = self.bracket(rest, mono, rho)?.act(&Poly::var(&ctx, last))?;
        out = out.sub(&b.signed(parity(inner_deg * ctx.degree(last))));
        Ok(out)
    }
}

/// Recovers the coefficient table of a black-box operator of order `k`.
///
/// Probes `D^{(w(J))}_{(z^J)}(Φ_ρ)` for `w(J) ≤ k`, then certifies the order
/// on the probe family: every `D^{(k+1)}_{(z^J)}(Φ_ρ)` with `w(J) = k+1` must
/// vanish and the table must reproduce the oracle on all `z^J Φ_ρ` with
/// `w(J) ≤ k+1`.
pub fn extract_coeffs(oracle: &dyn LinearMap, k: u32) -> Result<DiffOperator> {
    let source = oracle.source().clone();
    let target = oracle.target().clone();
    if !same_ctx(source.ctx(), target.ctx()) {
        return Err(Error::ContextMismatch);
    }
    let ctx = source.ctx().clone();
    let degree = oracle.degree();
    let mut prober = Prober::new(oracle);
    let mut table = DiffOperator::zero(&source, &target, k, degree);
    for j in multi_indices_up_to(&ctx, k) {
        let letters = j.letters();
        for rho in 0..source.rank() {
            let out = prober.bracket(&letters, &MultiIndex::zero(ctx.dim()), rho)?;
            for (kappa, c) in out.components().iter().enumerate() {
                let want = table.coeff_degree(&j, kappa, rho);
                if !c.is_homogeneous_of(want) {
                    return Err(Error::DegreeInconsistency(format!(
                        "probe [{j}] {}←{} returned {c}, expected degree {want}",
                        target.fiber_name(kappa),
                        source.fiber_name(rho)
                    )));
                }
                table.add_coeff((j.clone(), kappa, rho), c);
            }
        }
    }
    for j in multi_indices(&ctx, k + 1) {
        let letters = j.letters();
        for rho in 0..source.rank() {
            let out = prober.bracket(&letters, &MultiIndex::zero(ctx.dim()), rho)?;
            if !out.is_zero() {
                return Err(Error::OrderViolation(OrderWitness {
                    claimed_order: k as usize,
                    index: j.0.clone(),
                    fiber: source.fiber_name(rho).to_string(),
                    detail: format!("iterated commutator of order {} is {out}", k + 1),
                }));
            }
        }
    }
    for j in multi_indices_up_to(&ctx, k + 1) {
        for rho in 0..source.rank() {
            let want = prober.base(&j, rho)?;
            let probe = Section::single(
                &source,
                rho,
                Poly::monomial(&ctx, j.clone(), Rational::one()),
            );
            let got = table.apply(&probe)?;
            if got != want {
                return Err(Error::OrderViolation(OrderWitness {
                    claimed_order: k as usize,
                    index: j.0.clone(),
                    fiber: source.fiber_name(rho).to_string(),
                    detail: format!("table reproduces {got} but the map gives {want}"),
                }));
            }
        }
    }
    Ok(table)
}

/// `D ∘ D'`, extracted at order `k + m`.
pub fn compose(d: &DiffOperator, d2: &DiffOperator) -> Result<DiffOperator> {
    check_bundle(&d2.target, &d.source)?;
    let oracle = FnMap::new(
        &d2.source,
        &d.target,
        d.degree + d2.degree,
        |psi: &Section| d.apply(&d2.apply(psi)?),
    );
    extract_coeffs(&oracle, d.order + d2.order)
}

/// `[D, D'] = D∘D' − (−1)^{|D||D'|} D'∘D`, extracted at order `k + m`.
pub fn commutator(d: &DiffOperator, d2: &DiffOperator) -> Result<DiffOperator> {
    if !d.is_endo() || !d2.is_endo() {
        return Err(Error::BundleMismatch(
            "commutator needs endomorphisms".into(),
        ));
    }
    check_bundle(&d.source, &d2.source)?;
    let neg = parity(d.degree * d2.degree);
    let oracle = FnMap::new(
        &d.source,
        &d.source,
        d.degree + d2.degree,
        |psi: &Section| {
            let a = d.apply(&d2.apply(psi)?)?;
            let b = d2.apply(&d.apply(psi)?)?;
            Ok(a.sub(&b.signed(neg)))
        },
    );
    extract_coeffs(&oracle, d.order + d2.order)
}

/// `𝔓_I^λ_μ` evaluated straight from its defining formula, with no table.
pub struct FrameOperatorMap {
    bundle: Bundle,
    index: MultiIndex,
    from: usize,
    to: usize,
    degree: i64,
}

impl FrameOperatorMap {
    pub fn new(bundle: &Bundle, index: &MultiIndex, from: usize, to: usize) -> Result<Self> {
        let ctx = bundle.ctx();
        ctx.check_index(index)?;
        if from >= bundle.rank() {
            return Err(Error::BadFiber(from));
        }
        if to >= bundle.rank() {
            return Err(Error::BadFiber(to));
        }
        Ok(Self {
            bundle: bundle.clone(),
            index: index.clone(),
            from,
            to,
            degree: bundle.fiber_degree(to) - bundle.fiber_degree(from) - ctx.index_degree(index),
        })
    }
}

impl LinearMap for FrameOperatorMap {
    fn source(&self) -> &Bundle {
        &self.bundle
    }

    fn target(&self) -> &Bundle {
        &self.bundle
    }

    fn degree(&self) -> i64 {
        self.degree
    }

    fn apply(&self, psi: &Section) -> Result<Section> {
        check_bundle(&self.bundle, psi.bundle())?;
        let ctx = self.bundle.ctx();
        let shift = self.bundle.fiber_degree(self.to) - self.bundle.fiber_degree(self.from);
        let zi = ctx.index_degree(&self.index);
        let mut comp = Poly::zero(ctx);
        for (d, piece) in psi.component(self.from).pieces() {
            comp += &piece
                .partial_op(&self.index)?
                .signed(parity(shift * (d - zi)));
        }
        Ok(Section::single(&self.bundle, self.to, comp))
    }
}

/// `K^J^κ_ρ(𝔓_I^λ_μ)`, computed from iterated commutators of the frame
/// operator; expected to equal `J! δ^J_I δ^κ_μ δ^λ_ρ`.
pub fn dual_pairing_check(
    bundle: &Bundle,
    j: &MultiIndex,
    kappa: usize,
    rho: usize,
    i: &MultiIndex,
    l: usize,
    mu: usize,
) -> Result<Rational> {
    let map = FrameOperatorMap::new(bundle, i, l, mu)?;
    bundle.ctx().check_index(j)?;
    if kappa >= bundle.rank() || rho >= bundle.rank() {
        return Err(Error::BadFiber(kappa.max(rho)));
    }
    let ctx = bundle.ctx();
    let letters: Vec<Poly> = j.letters().into_iter().map(|a| Poly::var(ctx, a)).collect();
    let out = iterated_left(&map, &letters, &Section::frame(bundle, rho))?;
    let c = out.component(kappa);
    if c.max_weight().unwrap_or(0) > 0 {
        return Err(Error::DegreeInconsistency(format!(
            "pairing value {c} is not constant"
        )));
    }
    Ok(c.coeff(&MultiIndex::zero(ctx.dim())))
}

/// Graded rank of the bundle of order-`k` operators:
/// `ℓ_j = #{(I, μ, λ) : |ϑ_μ| − |ϑ_λ| − |z^I| = j, w(I) ≤ k}`.
pub fn diff_rank(bundle: &Bundle, k: u32) -> BTreeMap<i64, usize> {
    let ctx = bundle.ctx();
    let mut out = BTreeMap::new();
    for i in multi_indices_up_to(ctx, k) {
        let zi = ctx.index_degree(&i);
        for mu in 0..bundle.rank() {
            for l in 0..bundle.rank() {
                let j = bundle.fiber_degree(mu) - bundle.fiber_degree(l) - zi;
                *out.entry(j).or_insert(0) += 1;
            }
        }
    }
    out
}

/// Pulls an operator out of `E'` back along `F: E → E'`:
/// `ψ ↦ (−1)^{|F||D'|} D'(F(ψ))`, an operator out of `E`.
pub fn op_pullback(f: &BundleMap, d: &DiffOperator) -> Result<DiffOperator> {
    check_bundle(&f.target, &d.source)?;
    let neg = parity(f.degree * d.degree);
    let oracle = FnMap::new(
        &f.source,
        &d.target,
        f.degree + d.degree,
        |psi: &Section| Ok(d.apply(&f.apply(psi)?)?.signed(neg)),
    );
    extract_coeffs(&oracle, d.order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galg::int;
    use crate::gcore::CoordinateContext;
    use crate::gvb::BundleSpec;

    fn xtp() -> crate::gcore::Ctx {
        CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("p", 2)]).unwrap()
    }

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn frame_operator_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let psi = Section::single(&line, 0, Poly::var(&ctx, 2));
        assert_eq!(
            DiffOperator::frame_operator(&line, &idx(&[0, 0, 0]), 0, 0)
                .unwrap()
                .apply(&psi)
                .unwrap(),
            psi
        );
        let x = Poly::var(&ctx, 0);
        let dx = DiffOperator::frame_operator(&line, &idx(&[1, 0, 0]), 0, 0).unwrap();
        assert_eq!(
            dx.apply(&Section::single(&line, 0, &x * &x)).unwrap(),
            Section::single(&line, 0, x.scale(&int(2)))
        );
        let b = BundleSpec::from_pairs(&ctx, &[("e0", 0), ("e1", 1)]).unwrap();
        let p0 = DiffOperator::frame_operator(&b, &idx(&[0, 0, 0]), 0, 1).unwrap();
        let th = Poly::var(&ctx, 1);
        let psi = Section::new(&b, vec![th.clone(), x.clone()]).unwrap();
        assert_eq!(p0.apply(&psi).unwrap(), Section::single(&b, 1, -&th));
        let direct = FrameOperatorMap::new(&b, &idx(&[0, 0, 0]), 0, 1).unwrap();
        assert_eq!(direct.apply(&psi).unwrap(), p0.apply(&psi).unwrap());
    }

    #[test]
    fn extraction_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let x = Poly::var(&ctx, 0);
        let lam = DiffOperator::multiplication(&line, &x).unwrap();
        assert_eq!(extract_coeffs(&lam, 0).unwrap(), lam);
        let dx = DiffOperator::coordinate_derivative(&line, 0).unwrap();
        let got = extract_coeffs(&dx, 1).unwrap();
        assert_eq!(got, dx);
        assert_eq!(got.coeff(&idx(&[1, 0, 0]), 0, 0), Poly::one(&ctx));
        assert!(got.coeff(&idx(&[0, 0, 0]), 0, 0).is_zero());
        let dxdx = FnMap::new(&line, &line, 0, |psi: &Section| dx.apply(&dx.apply(psi)?));
        match extract_coeffs(&dxdx, 1) {
            Err(Error::OrderViolation(w)) => assert_eq!(w.index, vec![2, 0, 0]),
            other => panic!("expected order violation, got {other:?}"),
        }
        let sq = extract_coeffs(&dxdx, 2).unwrap();
        assert_eq!(
            sq.coeff(&idx(&[2, 0, 0]), 0, 0),
            Poly::constant(&ctx, int(2))
        );
    }

    #[test]
    fn bracket_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let id = DiffOperator::identity(&line);
        let dx = DiffOperator::coordinate_derivative(&line, 0).unwrap();
        assert_eq!(bracket_mult(&dx, &Poly::var(&ctx, 0)).unwrap(), id);
        let dth = DiffOperator::coordinate_derivative(&line, 1).unwrap();
        assert_eq!(bracket_mult(&dth, &Poly::var(&ctx, 1)).unwrap(), id);
        let lg = DiffOperator::multiplication(&line, &Poly::var(&ctx, 2)).unwrap();
        assert!(bracket_mult(&lg, &Poly::var(&ctx, 1)).unwrap().is_zero());

        let lx = DiffOperator::multiplication(&line, &Poly::var(&ctx, 0)).unwrap();
        let sq = compose(&dx, &dx).unwrap();
        assert_eq!(
            sq.coeff(&idx(&[2, 0, 0]), 0, 0),
            Poly::constant(&ctx, int(2))
        );
        let xdx = compose(&lx, &dx).unwrap();
        let c = commutator(&dx, &xdx).unwrap();
        assert_eq!(c.effective_order(), Some(1));
        assert_eq!(c, dx);
    }

    #[test]
    fn pairing_examples() {
        let ctx = xtp();
        let b = BundleSpec::from_pairs(&ctx, &[("e0", 0), ("e1", 1)]).unwrap();
        let i = idx(&[1, 0, 0]);
        assert_eq!(dual_pairing_check(&b, &i, 1, 0, &i, 0, 1).unwrap(), int(1));
        let i2 = idx(&[2, 0, 0]);
        assert_eq!(
            dual_pairing_check(&b, &i2, 0, 1, &i2, 1, 0).unwrap(),
            int(2)
        );
        assert_eq!(
            dual_pairing_check(&b, &i2, 0, 0, &idx(&[0, 1, 1]), 0, 0).unwrap(),
            int(0)
        );
    }

    #[test]
    fn rank_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let r = diff_rank(&line, 1);
        assert_eq!(r, BTreeMap::from([(0, 2), (-1, 1), (-2, 1)]));
        let xy = CoordinateContext::from_pairs(&[("x", 0), ("y", 0)]).unwrap();
        let r = diff_rank(&BundleSpec::line(&xy), 2);
        assert_eq!(r, BTreeMap::from([(0, 6)]));
    }

    #[test]
    fn pullback_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let dx = DiffOperator::coordinate_derivative(&line, 0).unwrap();
        assert_eq!(op_pullback(&BundleMap::identity(&line), &dx).unwrap(), dx);
        let g = Poly::var(&ctx, 1);
        let f = BundleMap::scalar(&line, &g).unwrap();
        let pulled = op_pullback(&f, &dx).unwrap();
        assert_eq!(pulled.degree(), 1);
        let psi = Section::single(&line, 0, Poly::var(&ctx, 0));
        assert_eq!(
            pulled.apply(&psi).unwrap(),
            dx.apply(&f.apply(&psi).unwrap()).unwrap()
        );
    }
}
