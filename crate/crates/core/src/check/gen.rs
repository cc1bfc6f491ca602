//! Bounded random inputs: coordinate degrees in [−3, 3], at most four
//! coordinates, small rational coefficients, orders at most 3.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::diffop::DiffOperator;
use crate::galg::{rat, Point, Poly, Rational};
use crate::gcore::{multi_indices, multi_indices_up_to, CoordinateContext, Ctx, MultiIndex};
use crate::gvb::{Bundle, BundleMap, BundleSpec, Section, SymTensor, Variance};
use crate::symbol::{Connection, SymbolMap};

pub type Rng8 = ChaCha8Rng;

const NAMES: [&str; 4] = ["x", "y", "u", "v"];

/// The reference contexts.
pub fn corpus_contexts() -> Vec<Ctx> {
    let specs: [&[(&str, i64)]; 6] = [
        &[("x", 0)],
        &[("x", 0), ("θ", 1)],
        &[("x", 0), ("θ", 1), ("p", 2)],
        &[("θ1", 1), ("θ2", 1)],
        &[("x", 0), ("θ", 1), ("η", -1)],
        &[("x", 0), ("y", 0)],
    ];
    specs
        .iter()
        .map(|s| CoordinateContext::from_pairs(s).expect("corpus context"))
        .collect()
}

/// The reference bundles over a context: a degree-0 line bundle and a
/// rank-2 bundle with fiber degrees (0, 1).
pub fn corpus_bundles(ctx: &Ctx) -> Vec<Bundle> {
    vec![
        BundleSpec::line(ctx),
        BundleSpec::from_pairs(ctx, &[("e0", 0), ("e1", 1)]).expect("corpus bundle"),
    ]
}

pub fn context(rng: &mut Rng8) -> Ctx {
    let n = rng.gen_range(1..=4);
    let pairs: Vec<(&str, i64)> = (0..n).map(|a| (NAMES[a], rng.gen_range(-3..=3))).collect();
    CoordinateContext::from_pairs(&pairs).expect("random context")
}

pub fn odd_context(rng: &mut Rng8) -> Ctx {
    let n = rng.gen_range(1..=4);
    let pairs: Vec<(&str, i64)> = (0..n)
        .map(|a| (NAMES[a], [-3, -1, 1, 3][rng.gen_range(0..4)]))
        .collect();
    CoordinateContext::from_pairs(&pairs).expect("odd context")
}

pub fn bundle(rng: &mut Rng8, ctx: &Ctx) -> Bundle {
    let r = rng.gen_range(1..=2);
    let pairs: Vec<(String, i64)> = (0..r)
        .map(|l| (format!("e{l}"), rng.gen_range(-2..=2)))
        .collect();
    let refs: Vec<(&str, i64)> = pairs.iter().map(|(s, d)| (s.as_str(), *d)).collect();
    BundleSpec::from_pairs(ctx, &refs).expect("random bundle")
}

/// A context and bundle: either from the reference corpus or random.
pub fn setting(rng: &mut Rng8) -> Bundle {
    if rng.gen_bool(0.5) {
        let ctxs = corpus_contexts();
        let ctx = ctxs.choose(rng).expect("nonempty").clone();
        corpus_bundles(&ctx).choose(rng).expect("nonempty").clone()
    } else {
        let ctx = context(rng);
        bundle(rng, &ctx)
    }
}

pub fn rational(rng: &mut Rng8) -> Rational {
    let mut n = rng.gen_range(-3..=3);
    if n == 0 {
        n = 1;
    }
    rat(n, rng.gen_range(1..=3))
}

pub fn point(rng: &mut Rng8, ctx: &CoordinateContext) -> Point {
    Point::new(ctx.coords().iter().filter(|c| c.degree == 0).map(|c| {
        (
            c.name.clone(),
            Rational::from_integer(rng.gen_range(-2i64..=2).into()),
        )
    }))
}

/// Random polynomial with up to `terms` monomials of weight ≤ `weight`.
pub fn poly(rng: &mut Rng8, ctx: &Ctx, weight: u32, terms: usize) -> Poly {
    let monos = multi_indices_up_to(ctx, weight);
    let mut p = Poly::zero(ctx);
    for _ in 0..rng.gen_range(0..=terms) {
        let i = monos.choose(rng).expect("nonempty").clone();
        p += &Poly::monomial(ctx, i, rational(rng));
    }
    p
}

/// Random polynomial homogeneous of degree `d`; zero when no monomial of
/// that degree has weight ≤ `weight`.
pub fn hom_poly(rng: &mut Rng8, ctx: &Ctx, d: i64, weight: u32, terms: usize) -> Poly {
    let monos: Vec<MultiIndex> = multi_indices_up_to(ctx, weight)
        .into_iter()
        .filter(|i| ctx.index_degree(i) == d)
        .collect();
    let mut p = Poly::zero(ctx);
    if monos.is_empty() {
        return p;
    }
    for _ in 0..rng.gen_range(1..=terms) {
        let i = monos.choose(rng).expect("nonempty").clone();
        p += &Poly::monomial(ctx, i, rational(rng));
    }
    p
}

/// A degree realised by some monomial of weight ≤ `weight`.
pub fn monomial_degree(rng: &mut Rng8, ctx: &Ctx, weight: u32) -> i64 {
    let monos = multi_indices_up_to(ctx, weight);
    ctx.index_degree(monos.choose(rng).expect("nonempty"))
}

/// A nonzero homogeneous function when one exists.
pub fn hom_function(rng: &mut Rng8, ctx: &Ctx, weight: u32) -> Poly {
    let d = monomial_degree(rng, ctx, weight);
    hom_poly(rng, ctx, d, weight, 2)
}

pub fn section(rng: &mut Rng8, b: &Bundle) -> Section {
    let comps = (0..b.rank()).map(|_| poly(rng, b.ctx(), 3, 3)).collect();
    Section::new(b, comps).expect("random section")
}

/// Section homogeneous of degree `d`.
pub fn hom_section(rng: &mut Rng8, b: &Bundle, d: i64) -> Section {
    let comps = (0..b.rank())
        .map(|l| hom_poly(rng, b.ctx(), d - b.fiber_degree(l), 3, 2))
        .collect();
    Section::new(b, comps).expect("random section")
}

/// Random operator `source → target` of declared order `k`. With
/// `force_top`, at least one coefficient of weight `k` is nonzero when the
/// context admits one.
pub fn operator_between(
    rng: &mut Rng8,
    source: &Bundle,
    target: &Bundle,
    k: u32,
    force_top: bool,
) -> DiffOperator {
    let ctx = source.ctx();
    let top = multi_indices(ctx, k);
    let all = multi_indices_up_to(ctx, k);
    let anchor_i = if force_top && !top.is_empty() {
        top.choose(rng).expect("nonempty").clone()
    } else {
        all.choose(rng).expect("nonempty").clone()
    };
    let mu = rng.gen_range(0..target.rank());
    let l = rng.gen_range(0..source.rank());
    let m = monomial_degree(rng, ctx, 2);
    let degree = m - ctx.index_degree(&anchor_i) - source.fiber_degree(l) + target.fiber_degree(mu);
    let want = |i: &MultiIndex, mu: usize, l: usize| {
        degree + ctx.index_degree(i) + source.fiber_degree(l) - target.fiber_degree(mu)
    };
    let mut coeffs = vec![(
        (anchor_i.clone(), mu, l),
        hom_poly(rng, ctx, want(&anchor_i, mu, l), 2, 2),
    )];
    for _ in 0..rng.gen_range(0..=3) {
        let i = all.choose(rng).expect("nonempty").clone();
        let mu = rng.gen_range(0..target.rank());
        let l = rng.gen_range(0..source.rank());
        let c = hom_poly(rng, ctx, want(&i, mu, l), 2, 2);
        coeffs.push(((i, mu, l), c));
    }
    DiffOperator::new(source, target, k, degree, coeffs).expect("random operator")
}

pub fn operator(rng: &mut Rng8, b: &Bundle, k: u32) -> DiffOperator {
    operator_between(rng, b, b, k, false)
}

/// Random operator of declared order `k` and the given degree whose
/// coefficients all have weight < `k`.
pub fn lower_operator(rng: &mut Rng8, b: &Bundle, k: u32, degree: i64) -> DiffOperator {
    let ctx = b.ctx();
    if k == 0 {
        return DiffOperator::zero(b, b, 0, degree);
    }
    let all = multi_indices_up_to(ctx, k - 1);
    let mut coeffs = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let i = all.choose(rng).expect("nonempty").clone();
        let mu = rng.gen_range(0..b.rank());
        let l = rng.gen_range(0..b.rank());
        let want = degree + ctx.index_degree(&i) + b.fiber_degree(l) - b.fiber_degree(mu);
        coeffs.push(((i, mu, l), hom_poly(rng, ctx, want, 2, 2)));
    }
    DiffOperator::endo(b, k, degree, coeffs).expect("lower operator")
}

/// Homogeneous multivector of the given arity, degree anchored on a
/// random coefficient.
pub fn multivector(rng: &mut Rng8, ctx: &Ctx, arity: u32) -> SymTensor {
    let idx = multi_indices(ctx, arity);
    if idx.is_empty() {
        return SymTensor::zero(ctx, arity, Variance::Multivector);
    }
    let anchor = idx.choose(rng).expect("nonempty").clone();
    let d = monomial_degree(rng, ctx, 2) - ctx.index_degree(&anchor);
    multivector_of_degree(rng, ctx, arity, d, Some(anchor))
}

pub fn multivector_of_degree(
    rng: &mut Rng8,
    ctx: &Ctx,
    arity: u32,
    d: i64,
    anchor: Option<MultiIndex>,
) -> SymTensor {
    let idx = multi_indices(ctx, arity);
    let mut coeffs = Vec::new();
    if let Some(a) = anchor {
        let c = hom_poly(rng, ctx, d + ctx.index_degree(&a), 2, 2);
        coeffs.push((a, c));
    }
    for _ in 0..rng.gen_range(0..=2) {
        if let Some(i) = idx.choose(rng) {
            let c = hom_poly(rng, ctx, d + ctx.index_degree(i), 2, 2);
            coeffs.push((i.clone(), c));
        }
    }
    SymTensor::new(ctx, arity, Variance::Multivector, coeffs).expect("random multivector")
}

/// Random symbol table of arity `k`.
pub fn symbol_map(rng: &mut Rng8, b: &Bundle, k: u32) -> SymbolMap {
    let ctx = b.ctx();
    let idx = multi_indices(ctx, k);
    if idx.is_empty() {
        return SymbolMap::new(b, k, 0, []).expect("empty symbol");
    }
    let anchor = idx.choose(rng).expect("nonempty").clone();
    let (mu, l) = (rng.gen_range(0..b.rank()), rng.gen_range(0..b.rank()));
    let degree = monomial_degree(rng, ctx, 2) - ctx.index_degree(&anchor) - b.fiber_degree(l)
        + b.fiber_degree(mu);
    let want = |i: &MultiIndex, mu: usize, l: usize| {
        degree + ctx.index_degree(i) + b.fiber_degree(l) - b.fiber_degree(mu)
    };
    let mut table = vec![(
        (anchor.clone(), mu, l),
        hom_poly(rng, ctx, want(&anchor, mu, l), 2, 2),
    )];
    for _ in 0..rng.gen_range(0..=2) {
        let i = idx.choose(rng).expect("nonempty").clone();
        let (mu, l) = (rng.gen_range(0..b.rank()), rng.gen_range(0..b.rank()));
        let c = hom_poly(rng, ctx, want(&i, mu, l), 2, 2);
        table.push(((i, mu, l), c));
    }
    SymbolMap::new(b, k, degree, table).expect("random symbol")
}

pub fn connection(rng: &mut Rng8, b: &Bundle) -> Connection {
    let ctx = b.ctx();
    let mut gamma = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let a = rng.gen_range(0..ctx.dim());
        let (mu, l) = (rng.gen_range(0..b.rank()), rng.gen_range(0..b.rank()));
        let want = b.fiber_degree(l) - b.fiber_degree(mu) - ctx.degree(a);
        gamma.push(((a, mu, l), hom_poly(rng, ctx, want, 2, 2)));
    }
    Connection::new(b, gamma).expect("random connection")
}

pub fn bundle_map(rng: &mut Rng8, source: &Bundle, target: &Bundle) -> BundleMap {
    let ctx = source.ctx();
    let (k, l) = (
        rng.gen_range(0..target.rank()),
        rng.gen_range(0..source.rank()),
    );
    let degree = monomial_degree(rng, ctx, 2) - source.fiber_degree(l) + target.fiber_degree(k);
    let matrix = (0..target.rank())
        .map(|k| {
            (0..source.rank())
                .map(|l| {
                    hom_poly(
                        rng,
                        ctx,
                        degree + source.fiber_degree(l) - target.fiber_degree(k),
                        2,
                        2,
                    )
                })
                .collect()
        })
        .collect();
    BundleMap::new(source, target, degree, matrix).expect("random bundle map")
}
