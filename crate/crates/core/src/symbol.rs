//! Symbols of differential operators, the scalar-symbol subclass, the
//! Schouten–Nijenhuis bracket, connections and curvature.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::diffop::{commutator, extract_coeffs, hom_degree, iterated_left, DiffOperator, FnMap};
use crate::error::{Error, Result};
use crate::galg::{same_ctx, Poly, Rational};
use crate::gcore::{multi_indices, parity, MultiIndex};
use crate::gvb::{check_bundle, fmt_frame, sym_pair, Bundle, Section, SymTensor, Variance};

/// Symbol table `F^I^μ_λ` with `σ(dz^I) = F^I^μ_λ · 𝔓_0^λ_μ`, `I ∈ N̄ⁿ(k)`.
#[derive(Clone, PartialEq, Eq)]
pub struct SymbolMap {
    bundle: Bundle,
    arity: u32,
    degree: i64,
    table: BTreeMap<(MultiIndex, usize, usize), Poly>,
}

impl fmt::Debug for SymbolMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SymbolMap(arity {}, degree {}; {self})",
            self.arity, self.degree
        )
    }
}

impl fmt::Display for SymbolMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.table.is_empty() {
            return write!(f, "0");
        }
        let ctx = self.bundle.ctx();
        let parts: Vec<String> = self
            .table
            .iter()
            .rev()
            .map(|((i, mu, l), c)| {
                let name = if i.is_zero() {
                    "1".to_string()
                } else {
                    fmt_frame(ctx, Variance::Form, i)
                };
                format!(
                    "σ({name})^{}_{} = {c}",
                    self.bundle.fiber_name(*mu),
                    self.bundle.fiber_name(*l)
                )
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl SymbolMap {
    pub fn new(
        bundle: &Bundle,
        arity: u32,
        degree: i64,
        table: impl IntoIterator<Item = ((MultiIndex, usize, usize), Poly)>,
    ) -> Result<Self> {
        let ctx = bundle.ctx();
        let mut out = Self {
            bundle: bundle.clone(),
            arity,
            degree,
            table: BTreeMap::new(),
        };
        for ((i, mu, l), c) in table {
            ctx.check_index(&i)?;
            if i.weight() != arity {
                return Err(Error::ArityMismatch(format!(
                    "index {i} is not of weight {arity}"
                )));
            }
            if mu >= bundle.rank() || l >= bundle.rank() {
                return Err(Error::BadFiber(mu.max(l)));
            }
            let want =
                degree + ctx.index_degree(&i) + bundle.fiber_degree(l) - bundle.fiber_degree(mu);
            if !c.is_homogeneous_of(want) {
                return Err(Error::DegreeInconsistency(format!(
                    "symbol entry at {i} should have degree {want}, got {c}"
                )));
            }
            if !c.is_zero() {
                let e = out
                    .table
                    .entry((i, mu, l))
                    .or_insert_with(|| Poly::zero(ctx));
                *e += &c;
            }
        }
        out.table.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn table(&self) -> &BTreeMap<(MultiIndex, usize, usize), Poly> {
        &self.table
    }

    pub fn entry(&self, i: &MultiIndex, mu: usize, l: usize) -> Poly {
        self.table
            .get(&(i.clone(), mu, l))
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.bundle.ctx()))
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    /// `σ(ω) = Σ_I (−1)^{|F||ω_I|} (1/I!) ω_I · F^I^μ_λ · 𝔓_0^λ_μ`.
    pub fn apply_form(&self, omega: &SymTensor) -> Result<DiffOperator> {
        if omega.variance() != Variance::Form || omega.arity() != self.arity {
            return Err(Error::ArityMismatch(
                "symbol expects a form of matching arity".into(),
            ));
        }
        if !same_ctx(omega.ctx(), self.bundle.ctx()) {
            return Err(Error::ContextMismatch);
        }
        let ctx = self.bundle.ctx();
        let z = MultiIndex::zero(ctx.dim());
        let mut coeffs: BTreeMap<(usize, usize), Poly> = BTreeMap::new();
        let mut degree = None;
        for ((i, mu, l), f) in &self.table {
            let w = omega.coeff(i);
            let scale = Rational::one() / Rational::from_integer(i.factorial());
            for (d, piece) in w.pieces() {
                degree.get_or_insert(self.degree + d + ctx.index_degree(i));
                let term = (&piece * f).scale(&scale).signed(parity(self.degree * d));
                let e = coeffs.entry((*mu, *l)).or_insert_with(|| Poly::zero(ctx));
                *e += &term;
            }
        }
        let degree = match (degree, omega.degree()) {
            (_, Some(d)) => self.degree + d,
            (Some(d), None) => d,
            (None, None) => self.degree,
        };
        DiffOperator::endo(
            &self.bundle,
            0,
            degree,
            coeffs
                .into_iter()
                .map(|((mu, l), c)| ((z.clone(), mu, l), c)),
        )
    }
}

/// `σ(D)(dz^I) = (−1)^{|z^I|} D^{(k)}_{(z^I)}`, computed from iterated
/// commutators of `D` at its declared order `k`.
pub fn symbol(d: &DiffOperator) -> Result<SymbolMap> {
    if !d.is_endo() {
        return Err(Error::BundleMismatch("symbol needs an endomorphism".into()));
    }
    let bundle = d.bundle().clone();
    let ctx = bundle.ctx().clone();
    let k = d.order();
    let mut table = Vec::new();
    for i in multi_indices(&ctx, k) {
        let letters: Vec<Poly> = i
            .letters()
            .into_iter()
            .map(|a| Poly::var(&ctx, a))
            .collect();
        let neg = parity(ctx.index_degree(&i));
        for l in 0..bundle.rank() {
            let out = iterated_left(d, &letters, &Section::frame(&bundle, l))?;
            for (mu, c) in out.components().iter().enumerate() {
                if !c.is_zero() {
                    table.push(((i.clone(), mu, l), c.signed(neg)));
                }
            }
        }
    }
    SymbolMap::new(&bundle, k, d.degree(), table)
}

/// An operator with the given symbol: `[D^J] = (−1)^{|z^J|} F^J`.
pub fn build_from_symbol(f: &SymbolMap) -> Result<DiffOperator> {
    let ctx = f.bundle.ctx();
    DiffOperator::endo(
        &f.bundle,
        f.arity,
        f.degree,
        f.table
            .iter()
            .map(|(key, c)| (key.clone(), c.signed(parity(ctx.index_degree(&key.0))))),
    )
}

/// `[I(X)](ω) = (−1)^{|X||ω|} λ_{ω(X)}` tabulated on the frame forms.
pub fn i_embed(x: &SymTensor, bundle: &Bundle) -> Result<SymbolMap> {
    if x.variance() != Variance::Multivector {
        return Err(Error::ArityMismatch("expected a multivector".into()));
    }
    if !same_ctx(x.ctx(), bundle.ctx()) {
        return Err(Error::ContextMismatch);
    }
    let ctx = bundle.ctx();
    let degree = match x.degree() {
        Some(d) => d,
        None if x.is_zero() => 0,
        None => {
            return Err(Error::NotHomogeneous(
                "multivector is not homogeneous".into(),
            ))
        }
    };
    let mut table = Vec::new();
    for i in multi_indices(ctx, x.arity()) {
        let v = sym_pair(&SymTensor::frame_form(ctx, &i), x)?
            .signed(parity(degree * ctx.index_degree(&i)));
        if v.is_zero() {
            continue;
        }
        for l in 0..bundle.rank() {
            table.push(((i.clone(), l, l), v.clone()));
        }
    }
    SymbolMap::new(bundle, x.arity(), degree, table)
}

/// `ℓ(D)`: the multivector `X` with `σ(D) = I(X)`, or `NotScalar`.
pub fn scalar_symbol(d: &DiffOperator) -> Result<SymTensor> {
    let s = symbol(d)?;
    scalar_part(&s)
}

pub fn scalar_part(s: &SymbolMap) -> Result<SymTensor> {
    let bundle = &s.bundle;
    let ctx = bundle.ctx();
    let mut coeffs = Vec::new();
    for i in multi_indices(ctx, s.arity) {
        let first = s.entry(&i, 0, 0);
        for mu in 0..bundle.rank() {
            for l in 0..bundle.rank() {
                let e = s.entry(&i, mu, l);
                let ok = if mu == l { e == first } else { e.is_zero() };
                if !ok {
                    return Err(Error::NotScalar(format!(
                        "entry at {i} {}←{} is {e}",
                        bundle.fiber_name(mu),
                        bundle.fiber_name(l)
                    )));
                }
            }
        }
        if bundle.rank() > 0 && !first.is_zero() {
            let c = first
                .scale(&(Rational::one() / Rational::from_integer(i.factorial())))
                .signed(parity(ctx.index_degree(&i)));
            coeffs.push((i, c));
        }
    }
    SymTensor::new(ctx, s.arity, Variance::Multivector, coeffs)
}

/// Schouten–Nijenhuis bracket of symmetric multivector fields.
///
/// Computed on normal-ordered words in coordinates and frame fields by
/// peeling letters off with the Leibniz rule, starting from
/// `[∂_A, z^B] = δ^B_A`.
pub fn sn_bracket(x: &SymTensor, y: &SymTensor) -> Result<SymTensor> {
    if x.variance() != Variance::Multivector || y.variance() != Variance::Multivector {
        return Err(Error::ArityMismatch("bracket needs multivectors".into()));
    }
    if !same_ctx(x.ctx(), y.ctx()) {
        return Err(Error::ContextMismatch);
    }
    let ctx = x.ctx();
    let arity = (x.arity() + y.arity()).saturating_sub(1);
    if x.arity() + y.arity() == 0 {
        return Ok(SymTensor::zero(ctx, 0, Variance::Multivector));
    }
    let ext = x.extended_ctx();
    let xe = x.to_extended(&ext);
    let ye = y.to_extended(&ext);
    let n = ctx.dim();
    let mut out = Poly::zero(&ext);
    for (i, a) in xe.terms() {
        for (j, b) in ye.terms() {
            let v = word_bracket(&ext, n, &i.letters(), &j.letters())?;
            out += &v.scale(&(a * b));
        }
    }
    let mut t = SymTensor::from_extended(ctx, Variance::Multivector, &out)?;
    if t.is_zero() {
        t = SymTensor::zero(ctx, arity, Variance::Multivector);
    }
    Ok(t)
}

fn word(ext: &crate::gcore::Ctx, letters: &[usize]) -> Poly {
    let mut e = vec![0u32; ext.dim()];
    for &l in letters {
        e[l] += 1;
    }
    Poly::monomial(ext, MultiIndex(e), Rational::one())
}

fn word_degree(ext: &crate::gcore::Ctx, letters: &[usize]) -> i64 {
    letters.iter().map(|&l| ext.degree(l)).sum()
}

/// Bracket of two normal-ordered words; letters `< n` are coordinates and
/// letters `≥ n` are frame fields.
fn word_bracket(ext: &crate::gcore::Ctx, n: usize, x: &[usize], y: &[usize]) -> Result<Poly> {
    if x.is_empty() || y.is_empty() {
        return Ok(Poly::zero(ext));
    }
    if y.len() > 1 {
        // [X, b·Y'] = [X, b]·Y' + (−1)^{|X||b|} b·[X, Y']
        let (b, rest) = (&y[..1], &y[1..]);
        let first = &word_bracket(ext, n, x, b)? * &word(ext, rest);
        let second = &word(ext, b) * &word_bracket(ext, n, x, rest)?;
        let neg = parity(word_degree(ext, x) * word_degree(ext, b));
        return Ok(&first + &second.signed(neg));
    }
    if x.len() > 1 {
        // [a·X', b] = a·[X', b] + (−1)^{|X'||b|} [a, b]·X'
        let (a, rest) = (&x[..1], &x[1..]);
        let first = &word(ext, a) * &word_bracket(ext, n, rest, y)?;
        let second = &word_bracket(ext, n, a, y)? * &word(ext, rest);
        let neg = parity(word_degree(ext, rest) * word_degree(ext, y));
        return Ok(&first + &second.signed(neg));
    }
    let (a, b) = (x[0], y[0]);
    let c = if a >= n && b < n && a - n == b {
        Rational::one()
    } else if a < n && b >= n && b - n == a {
        if ext.is_odd(a) {
            Rational::one()
        } else {
            -Rational::one()
        }
    } else {
        return Ok(Poly::zero(ext));
    };
    Ok(Poly::constant(ext, c))
}

/// A commutator together with both sides of the symbol identity.
#[derive(Debug, Clone)]
pub struct CommutatorSymbol {
    pub commutator: DiffOperator,
    pub lhs: SymTensor,
    pub rhs: SymTensor,
}

/// Computes `[D, D']`, its scalar symbol at order `k + m − 1`, and the
/// bracket of the two scalar symbols.
pub fn commutator_symbol_check(d: &DiffOperator, d2: &DiffOperator) -> Result<CommutatorSymbol> {
    let x = scalar_symbol(d)?;
    let y = scalar_symbol(d2)?;
    let c = commutator(d, d2)?;
    let order = (d.order() + d2.order()).saturating_sub(1);
    let c = c.with_order(order)?;
    let lhs = if d.order() + d2.order() == 0 {
        SymTensor::zero(d.bundle().ctx(), 0, Variance::Multivector)
    } else {
        scalar_symbol(&c)?
    };
    let rhs = sn_bracket(&x, &y)?;
    Ok(CommutatorSymbol {
        commutator: c,
        lhs,
        rhs,
    })
}

/// Connection given by `∇_{∂_A} Φ_λ = Γ^μ_{Aλ} Φ_μ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    bundle: Bundle,
    gamma: BTreeMap<(usize, usize, usize), Poly>,
}

impl Connection {
    /// Entries are keyed by `(A, μ, λ)` and must have degree
    /// `|ϑ_λ| − |ϑ_μ| − |z^A|`.
    pub fn new(
        bundle: &Bundle,
        gamma: impl IntoIterator<Item = ((usize, usize, usize), Poly)>,
    ) -> Result<Self> {
        let ctx = bundle.ctx();
        let mut out = Self {
            bundle: bundle.clone(),
            gamma: BTreeMap::new(),
        };
        for ((a, mu, l), g) in gamma {
            if a >= ctx.dim() {
                return Err(Error::BadCoordinate(a));
            }
            if mu >= bundle.rank() || l >= bundle.rank() {
                return Err(Error::BadFiber(mu.max(l)));
            }
            let want = bundle.fiber_degree(l) - bundle.fiber_degree(mu) - ctx.degree(a);
            if !g.is_homogeneous_of(want) {
                return Err(Error::DegreeInconsistency(format!(
                    "Christoffel symbol for ({}, {}, {}) should have degree {want}, got {g}",
                    ctx.name(a),
                    bundle.fiber_name(mu),
                    bundle.fiber_name(l)
                )));
            }
            if !g.is_zero() {
                let e = out
                    .gamma
                    .entry((a, mu, l))
                    .or_insert_with(|| Poly::zero(ctx));
                *e += &g;
            }
        }
        Ok(out)
    }

    pub fn flat(bundle: &Bundle) -> Self {
        Self {
            bundle: bundle.clone(),
            gamma: BTreeMap::new(),
        }
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn gamma(&self) -> &BTreeMap<(usize, usize, usize), Poly> {
        &self.gamma
    }

    /// `∇_{∂_A}` as a first-order operator.
    pub fn along_coordinate(&self, a: usize) -> Result<DiffOperator> {
        let ctx = self.bundle.ctx();
        let mut coeffs = Vec::new();
        let e = MultiIndex::unit(ctx.dim(), a);
        for l in 0..self.bundle.rank() {
            coeffs.push(((e.clone(), l, l), Poly::one(ctx)));
        }
        let z = MultiIndex::zero(ctx.dim());
        for ((b, mu, l), g) in &self.gamma {
            if *b == a {
                coeffs.push(((z.clone(), *mu, *l), g.clone()));
            }
        }
        DiffOperator::endo(&self.bundle, 1, -ctx.degree(a), coeffs)
    }

    /// `∇_X = X^A · ∇_{∂_A}` for a homogeneous vector field.
    pub fn along(&self, x: &SymTensor) -> Result<DiffOperator> {
        if x.variance() != Variance::Multivector || x.arity() != 1 {
            return Err(Error::ArityMismatch("expected a vector field".into()));
        }
        if !same_ctx(x.ctx(), self.bundle.ctx()) {
            return Err(Error::ContextMismatch);
        }
        let ctx = self.bundle.ctx();
        let degree = match x.degree() {
            Some(d) => d,
            None if x.is_zero() => 0,
            None => {
                return Err(Error::NotHomogeneous(
                    "vector field is not homogeneous".into(),
                ))
            }
        };
        let mut acc = DiffOperator::zero(&self.bundle, &self.bundle, 1, degree);
        for a in 0..ctx.dim() {
            let xa = x.coeff(&MultiIndex::unit(ctx.dim(), a));
            if xa.is_zero() {
                continue;
            }
            acc = acc.add(&self.along_coordinate(a)?.mul_left(&xa)?)?;
        }
        Ok(acc)
    }
}

/// `∇_X ψ`.
pub fn covariant_derivative(conn: &Connection, x: &SymTensor, psi: &Section) -> Result<Section> {
    check_bundle(&conn.bundle, psi.bundle())?;
    conn.along(x)?.apply(psi)
}

/// `R(X, Y) = [∇_X, ∇_Y] − ∇_{[X,Y]}`, certified to be of order 0.
pub fn curvature(conn: &Connection, x: &SymTensor, y: &SymTensor) -> Result<DiffOperator> {
    let nx = conn.along(x)?;
    let ny = conn.along(y)?;
    let bracket = sn_bracket(x, y)?;
    let nxy = conn.along(&bracket)?;
    let neg = parity(nx.degree() * ny.degree());
    let degree = nx.degree() + ny.degree();
    let oracle = FnMap::new(&conn.bundle, &conn.bundle, degree, |psi: &Section| {
        let a = nx.apply(&ny.apply(psi)?)?;
        let b = ny.apply(&nx.apply(psi)?)?;
        Ok(a.sub(&b.signed(neg)).sub(&nxy.apply(psi)?))
    });
    extract_coeffs(&oracle, 0)
}

/// `f · D` for a homogeneous function, as an operator.
pub fn scaled(d: &DiffOperator, f: &Poly) -> Result<DiffOperator> {
    hom_degree(f)?;
    d.mul_left(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::compose;
    use crate::galg::int;
    use crate::gcore::CoordinateContext;
    use crate::gvb::BundleSpec;

    fn xtp() -> crate::gcore::Ctx {
        CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("p", 2)]).unwrap()
    }

    fn mv_fn(f: &Poly) -> SymTensor {
        SymTensor::function(f, Variance::Multivector)
    }

    #[test]
    fn symbol_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let dx = DiffOperator::coordinate_derivative(&line, 0).unwrap();
        let s = symbol(&dx).unwrap();
        assert_eq!(s.entry(&MultiIndex(vec![1, 0, 0]), 0, 0), Poly::one(&ctx));
        assert_eq!(s.table().len(), 1);
        assert_eq!(
            scalar_symbol(&dx).unwrap(),
            SymTensor::coordinate_field(&ctx, 0)
        );

        let x = Poly::var(&ctx, 0);
        let lam = DiffOperator::multiplication(&line, &x).unwrap();
        assert_eq!(scalar_symbol(&lam).unwrap(), mv_fn(&x));
        assert!(symbol(&lam.with_order(1).unwrap()).unwrap().is_zero());

        let b = BundleSpec::from_pairs(&ctx, &[("e0", 0), ("e1", 1)]).unwrap();
        let off = DiffOperator::frame_operator(&b, &MultiIndex::zero(3), 0, 1).unwrap();
        assert!(matches!(scalar_symbol(&off), Err(Error::NotScalar(_))));
    }

    #[test]
    fn sn_examples() {
        let ctx = xtp();
        let x = Poly::var(&ctx, 0);
        let px = SymTensor::coordinate_field(&ctx, 0);
        assert_eq!(
            sn_bracket(&px, &mv_fn(&x)).unwrap(),
            mv_fn(&Poly::one(&ctx))
        );
        let sq = px.product(&px).unwrap();
        assert_eq!(sn_bracket(&sq, &mv_fn(&x)).unwrap(), px.scale(&int(2)));
        assert!(sn_bracket(&mv_fn(&x), &mv_fn(&x)).unwrap().is_zero());
        let xpx = px.product(&mv_fn(&x)).unwrap();
        assert_eq!(sn_bracket(&xpx, &px).unwrap(), px.neg());
    }

    #[test]
    fn commutator_symbol_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let dx = DiffOperator::coordinate_derivative(&line, 0).unwrap();
        let lx = DiffOperator::multiplication(&line, &Poly::var(&ctx, 0)).unwrap();
        let r = commutator_symbol_check(&dx, &dx).unwrap();
        assert!(r.commutator.is_zero() && r.lhs.is_zero() && r.rhs.is_zero());
        let r = commutator_symbol_check(&dx, &lx).unwrap();
        assert_eq!(r.commutator, DiffOperator::identity(&line));
        assert_eq!(r.lhs, r.rhs);
        let xdx = compose(&lx, &dx).unwrap();
        let r = commutator_symbol_check(&xdx, &dx).unwrap();
        assert_eq!(r.commutator, dx.neg());
        assert_eq!(r.lhs, SymTensor::coordinate_field(&ctx, 0).neg());
        assert_eq!(r.lhs, r.rhs);
    }

    #[test]
    fn curvature_example() {
        let ctx = CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("η", -1)]).unwrap();
        let line = BundleSpec::line(&ctx);
        let conn = Connection::new(
            &line,
            [
                ((1, 0, 0), Poly::var(&ctx, 2)),
                ((2, 0, 0), Poly::var(&ctx, 1)),
            ],
        )
        .unwrap();
        let f = |a| SymTensor::coordinate_field(&ctx, a);
        let r = curvature(&conn, &f(1), &f(2)).unwrap();
        assert_eq!(r, DiffOperator::identity(&line).scale(&int(2)));
        assert!(curvature(&conn, &f(0), &f(1)).unwrap().is_zero());
        assert!(curvature(&Connection::flat(&line), &f(1), &f(2))
            .unwrap()
            .is_zero());
        let psi = Section::single(&line, 0, Poly::var(&ctx, 0));
        assert_eq!(
            covariant_derivative(&Connection::flat(&line), &f(0), &psi).unwrap(),
            Section::frame(&line, 0)
        );
        assert!(Connection::new(&line, [((1, 0, 0), Poly::var(&ctx, 1))]).is_err());
    }

    #[test]
    fn embedding_round_trip() {
        let ctx = xtp();
        let b = BundleSpec::from_pairs(&ctx, &[("e0", 0), ("e1", 1)]).unwrap();
        let px = SymTensor::coordinate_field(&ctx, 0);
        let s = i_embed(&px, &b).unwrap();
        assert_eq!(s.entry(&MultiIndex(vec![1, 0, 0]), 1, 1), Poly::one(&ctx));
        assert_eq!(scalar_part(&s).unwrap(), px);
        let zero = SymTensor::zero(&ctx, 2, Variance::Multivector);
        assert!(i_embed(&zero, &b).unwrap().is_zero());
    }
}
