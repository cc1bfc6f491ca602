//! Jets in the canonical frame `δ^I_λ`: prolongation, projection, the
//! operator/jet pairing, jets at a point, pushforward and rank counts.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::diffop::{op_pullback, DiffOperator};
use crate::error::{Error, Result};
use crate::galg::{same_ctx, Point, Poly, Rational};
use crate::gcore::{multi_indices, multi_indices_up_to, parity, MultiIndex};
use crate::gvb::{check_bundle, fmt_q, Bundle, BundleMap, Section};

/// `Σ j^I_λ ▷ δ^I_λ` over `w(I) ≤ k`.
#[derive(Clone, PartialEq, Eq)]
pub struct JetVector {
    bundle: Bundle,
    order: u32,
    coeffs: BTreeMap<(MultiIndex, usize), Poly>,
}

impl fmt::Debug for JetVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetVector(order {}; {self})", self.order)
    }
}

impl fmt::Display for JetVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|((i, l), c)| format!("j^{i}_{} = {c}", self.bundle.fiber_name(*l)))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl JetVector {
    pub fn zero(bundle: &Bundle, order: u32) -> Self {
        Self {
            bundle: bundle.clone(),
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn new(
        bundle: &Bundle,
        order: u32,
        coeffs: impl IntoIterator<Item = ((MultiIndex, usize), Poly)>,
    ) -> Result<Self> {
        let ctx = bundle.ctx();
        let mut out = Self::zero(bundle, order);
        for ((i, l), c) in coeffs {
            ctx.check_index(&i)?;
            if i.weight() > order {
                return Err(Error::OrderMismatch(format!(
                    "jet coefficient at {i} exceeds order {order}"
                )));
            }
            if l >= bundle.rank() {
                return Err(Error::BadFiber(l));
            }
            if !same_ctx(c.ctx(), ctx) {
                return Err(Error::ContextMismatch);
            }
            out.add(i, l, &c);
        }
        Ok(out)
    }

    fn add(&mut self, i: MultiIndex, l: usize, c: &Poly) {
        if c.is_zero() {
            return;
        }
        let key = (i, l);
        let e = self
            .coeffs
            .entry(key.clone())
            .or_insert_with(|| Poly::zero(self.bundle.ctx()));
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &BTreeMap<(MultiIndex, usize), Poly> {
        &self.coeffs
    }

    pub fn coeff(&self, i: &MultiIndex, l: usize) -> Poly {
        self.coeffs
            .get(&(i.clone(), l))
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.bundle.ctx()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_bundle(&self.bundle, &other.bundle)?;
        if self.order != other.order {
            return Err(Error::OrderMismatch("jets of different orders".into()));
        }
        let mut out = self.clone();
        for ((i, l), c) in &other.coeffs {
            out.add(i.clone(), *l, c);
        }
        Ok(out)
    }

    /// `g ▷ j`, multiplying every coefficient on the left.
    pub fn act(&self, g: &Poly) -> Result<Self> {
        if !same_ctx(g.ctx(), self.bundle.ctx()) {
            return Err(Error::ContextMismatch);
        }
        let mut out = Self::zero(&self.bundle, self.order);
        for ((i, l), c) in &self.coeffs {
            out.add(i.clone(), *l, &(g * c));
        }
        Ok(out)
    }

    /// `π^{k,ℓ}`: drops the coefficients of weight above `ℓ`.
    pub fn project(&self, l: u32) -> Result<Self> {
        if l > self.order {
            return Err(Error::OrderMismatch(format!(
                "cannot project a jet of order {} to order {l}",
                self.order
            )));
        }
        Ok(Self {
            bundle: self.bundle.clone(),
            order: l,
            coeffs: self
                .coeffs
                .iter()
                .filter(|((i, _), _)| i.weight() <= l)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        })
    }
}

/// Right-derivative function used for prolongation; swappable for
/// mutation testing.
pub type RightPartial = fn(&Poly, &MultiIndex) -> Result<Poly>;

pub fn default_right_partial(f: &Poly, i: &MultiIndex) -> Result<Poly> {
    f.partial_right_multi(i)
}

/// `j^I_λ = (−1)^{w(I)} (1/I!) ∂^◁_I ψ^λ` for `w(I) ≤ k`.
pub fn prolong(psi: &Section, k: u32) -> Result<JetVector> {
    prolong_with(psi, k, default_right_partial)
}

pub fn prolong_with(psi: &Section, k: u32, right: RightPartial) -> Result<JetVector> {
    let bundle = psi.bundle();
    let ctx = bundle.ctx();
    let mut out = JetVector::zero(bundle, k);
    for i in multi_indices_up_to(ctx, k) {
        let scale = Rational::one() / Rational::from_integer(i.factorial());
        for (l, c) in psi.components().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = right(c, &i)?.scale(&scale).signed(i.weight() % 2 == 1);
            out.add(i.clone(), l, &d);
        }
    }
    Ok(out)
}

/// `𝔧^k[D](j)`: evaluates an operator on a jet,
/// `D(j)^μ = Σ (−1)^{|D||j^I_λ| + w(I)} j^I_λ · [D^I]^μ_λ`.
pub fn operator_on_jet(d: &DiffOperator, j: &JetVector) -> Result<Section> {
    check_bundle(d.source(), j.bundle())?;
    if d.order() > j.order() {
        return Err(Error::OrderMismatch(format!(
            "operator of order {} on a jet of order {}",
            d.order(),
            j.order()
        )));
    }
    let target = d.target();
    let mut out = Section::zero(target).components().to_vec();
    let mut pieces: BTreeMap<(MultiIndex, usize), BTreeMap<i64, Poly>> = BTreeMap::new();
    for ((i, mu, l), c) in d.coeffs() {
        let key = (i.clone(), *l);
        let ps = pieces
            .entry(key.clone())
            .or_insert_with(|| j.coeffs.get(&key).map(Poly::pieces).unwrap_or_default());
        for (e, p) in ps.iter() {
            let neg = parity(d.degree() * e + i.weight() as i64);
            out[*mu] += &(p * c).signed(neg);
        }
    }
    Section::new(target, out)
}

/// Pushes a jet forward along a bundle map by duality: the `(J, κ)`
/// coefficient of the image is read off by the unit-coefficient operator
/// at `(J, κ, κ)` pulled back along `F`.
pub fn jet_pushforward(f: &BundleMap, j: &JetVector) -> Result<JetVector> {
    check_bundle(&f.source, j.bundle())?;
    let target = &f.target;
    let ctx = target.ctx();
    let mut out = JetVector::zero(target, j.order());
    for big_j in multi_indices_up_to(ctx, j.order()) {
        let pdeg = -ctx.index_degree(&big_j);
        for kappa in 0..target.rank() {
            let probe = DiffOperator::endo(
                target,
                big_j.weight(),
                pdeg,
                [((big_j.clone(), kappa, kappa), Poly::one(ctx))],
            )?;
            let pulled = op_pullback(f, &probe)?;
            let r = operator_on_jet(&pulled, j)?;
            let r = r.component(kappa).signed(parity(f.degree * pdeg));
            for (e, p) in r.pieces() {
                let neg = parity(pdeg * e + big_j.weight() as i64);
                out.add(big_j.clone(), kappa, &p.signed(neg));
            }
        }
    }
    Ok(out)
}

/// Exact values `(∂^op_I ψ^λ)(a)` for `w(I) ≤ k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetAtPoint {
    pub bundle: Bundle,
    pub order: u32,
    pub point: Point,
    pub values: BTreeMap<(MultiIndex, usize), Rational>,
}

impl fmt::Display for JetAtPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .values
            .iter()
            .map(|((i, l), v)| format!("{i}_{}: {}", self.bundle.fiber_name(*l), fmt_q(v)))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub fn jet_at_point(psi: &Section, k: u32, a: &Point) -> Result<JetAtPoint> {
    let bundle = psi.bundle();
    let ctx = bundle.ctx();
    let vals = a.values_for(ctx)?;
    let mut values = BTreeMap::new();
    for i in multi_indices_up_to(ctx, k) {
        for (l, c) in psi.components().iter().enumerate() {
            values.insert((i.clone(), l), c.partial_op(&i)?.evaluate_body_at(&vals));
        }
    }
    Ok(JetAtPoint {
        bundle: bundle.clone(),
        order: k,
        point: a.clone(),
        values,
    })
}

/// Whether every component lies in `(J^a)^{k+1}`.
pub fn vanishes_to_order(psi: &Section, k: u32, a: &Point) -> Result<bool> {
    for c in psi.components() {
        if !c.taylor_split(a, k)?.0.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `q_j = #{(I, λ) : |z^I| + |ϑ_λ| = j, w(I) ≤ k}`.
pub fn jet_rank(bundle: &Bundle, k: u32) -> BTreeMap<i64, usize> {
    count_ranks(bundle, multi_indices_up_to(bundle.ctx(), k))
}

/// Graded rank of `Hom(S^k(TM), E)`: the same count over `w(I) = k`.
pub fn hom_sk_rank(bundle: &Bundle, k: u32) -> BTreeMap<i64, usize> {
    count_ranks(bundle, multi_indices(bundle.ctx(), k))
}

fn count_ranks(bundle: &Bundle, indices: Vec<MultiIndex>) -> BTreeMap<i64, usize> {
    let ctx = bundle.ctx();
    let mut out = BTreeMap::new();
    for i in indices {
        let zi = ctx.index_degree(&i);
        for l in 0..bundle.rank() {
            *out.entry(zi + bundle.fiber_degree(l)).or_insert(0) += 1;
        }
    }
    out
}

pub fn total_rank(r: &BTreeMap<i64, usize>) -> usize {
    r.values().sum()
}

/// Componentwise sum of two graded ranks.
pub fn add_ranks(a: &BTreeMap<i64, usize>, b: &BTreeMap<i64, usize>) -> BTreeMap<i64, usize> {
    let mut out = a.clone();
    for (d, n) in b {
        *out.entry(*d).or_insert(0) += n;
    }
    out
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
    fn prolong_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let x = Poly::var(&ctx, 0);
        let psi = Section::single(&line, 0, &x * &x);
        let j = prolong(&psi, 1).unwrap();
        assert_eq!(j.coeff(&idx(&[0, 0, 0]), 0), &x * &x);
        assert_eq!(j.coeff(&idx(&[1, 0, 0]), 0), x.scale(&int(-2)));
        assert_eq!(j.coeffs().len(), 2);
        assert_eq!(j.project(0).unwrap(), prolong(&psi, 0).unwrap());
        assert!(j.project(2).is_err());
        let frame = prolong(&Section::frame(&line, 0), 3).unwrap();
        assert_eq!(frame.coeffs().len(), 1);
    }

    #[test]
    fn factorization_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let x = Poly::var(&ctx, 0);
        let th = Poly::var(&ctx, 1);
        let dx = DiffOperator::coordinate_derivative(&line, 0).unwrap();
        let psi = Section::single(&line, 0, &x * &x);
        assert_eq!(
            operator_on_jet(&dx, &prolong(&psi, 1).unwrap()).unwrap(),
            dx.apply(&psi).unwrap()
        );
        let p = DiffOperator::frame_operator(&line, &idx(&[0, 1, 0]), 0, 0).unwrap();
        let psi = Section::single(&line, 0, &x * &th);
        assert_eq!(
            operator_on_jet(&p, &prolong(&psi, 1).unwrap()).unwrap(),
            p.apply(&psi).unwrap()
        );
        let b = BundleSpec::from_pairs(&ctx, &[("e0", 0), ("e1", 1)]).unwrap();
        let pp = Poly::var(&ctx, 2);
        let psi = Section::new(&b, vec![&(&x * &th) * &pp, &th * &pp]).unwrap();
        for i in multi_indices_up_to(&ctx, 2) {
            for l in 0..2 {
                for mu in 0..2 {
                    let d = DiffOperator::frame_operator(&b, &i, l, mu).unwrap();
                    assert_eq!(
                        operator_on_jet(&d, &prolong(&psi, 2).unwrap()).unwrap(),
                        d.apply(&psi).unwrap(),
                        "{i} {l} {mu}"
                    );
                }
            }
        }
    }

    #[test]
    fn pushforward_examples() {
        let ctx = xtp();
        let b = BundleSpec::from_pairs(&ctx, &[("e0", 0), ("e1", 1)]).unwrap();
        let x = Poly::var(&ctx, 0);
        let th = Poly::var(&ctx, 1);
        let pp = Poly::var(&ctx, 2);
        let psi = Section::new(&b, vec![&(&x * &th) * &pp, &(&x * &x) * &th]).unwrap();
        let j = prolong(&psi, 2).unwrap();
        assert_eq!(jet_pushforward(&BundleMap::identity(&b), &j).unwrap(), j);
        let f = BundleMap::new(
            &b,
            &b,
            2,
            vec![
                vec![Poly::zero(&ctx), Poly::zero(&ctx)],
                vec![th.clone(), Poly::zero(&ctx)],
            ],
        )
        .unwrap();
        assert_eq!(
            jet_pushforward(&f, &j).unwrap(),
            prolong(&f.apply(&psi).unwrap(), 2).unwrap()
        );
        let line = BundleSpec::line(&ctx);
        let g = &x * &th;
        let lam = BundleMap::scalar(&line, &g).unwrap();
        let one = prolong(&Section::frame(&line, 0), 2).unwrap();
        assert_eq!(
            jet_pushforward(&lam, &one).unwrap(),
            prolong(&Section::single(&line, 0, g), 2).unwrap()
        );
    }

    #[test]
    fn point_and_rank_examples() {
        let ctx = xtp();
        let line = BundleSpec::line(&ctx);
        let x = Poly::var(&ctx, 0);
        let psi = Section::single(&line, 0, &x * &x);
        let a = Point::new([("x".to_string(), int(1))]);
        let jp = jet_at_point(&psi, 1, &a).unwrap();
        assert_eq!(jp.values[&(idx(&[0, 0, 0]), 0)], int(1));
        assert_eq!(jp.values[&(idx(&[1, 0, 0]), 0)], int(2));
        let t = &x - &Poly::one(&ctx);
        let bump = Section::single(&line, 0, &(&t * &t) * &t);
        assert_eq!(
            jet_at_point(&psi.add(&bump), 2, &a).unwrap(),
            jet_at_point(&psi, 2, &a).unwrap()
        );
        assert!(vanishes_to_order(&bump, 2, &a).unwrap());
        assert!(!vanishes_to_order(&bump, 3, &a).unwrap());

        assert_eq!(jet_rank(&line, 1), BTreeMap::from([(0, 2), (1, 1), (2, 1)]));
        assert_eq!(
            add_ranks(&jet_rank(&line, 1), &hom_sk_rank(&line, 2)),
            jet_rank(&line, 2)
        );
        let odd = CoordinateContext::from_pairs(&[("θ1", 1), ("θ2", 1)]).unwrap();
        let l2 = BundleSpec::line(&odd);
        assert_eq!(jet_rank(&l2, 2), jet_rank(&l2, 5));
    }
}
