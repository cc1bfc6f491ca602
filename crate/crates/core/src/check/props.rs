use std::collections::BTreeMap;

use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;

use super::gen;
use super::{Case, Fail, Property, Suite};
use crate::diffop::{
    bracket_mult, commutator, compose, diff_rank, dual_pairing_check, extract_coeffs,
    iterated_bracket, iterated_left, DiffOperator, Flavor, FrameOperatorMap, LinearMap,
};
use crate::error::Error;
use crate::galg::{int, leibniz_multi, Poly, Rational};
use crate::gcore::{binomial, multi_indices_up_to, parity, CoordinateContext, Ctx, MultiIndex};
use crate::gvb::{BundleMap, BundleSpec, Section, SymTensor, Variance};
use crate::jets::{
    add_ranks, hom_sk_rank, jet_at_point, jet_pushforward, jet_rank, operator_on_jet, prolong,
    prolong_with, total_rank, vanishes_to_order, JetVector,
};
use crate::symbol::{
    build_from_symbol, commutator_symbol_check, curvature, i_embed, sn_bracket, symbol, Connection,
};

type R = Result<(), Fail>;

macro_rules! prop {
    ($suite:ident, $name:ident) => {
        Property {
            suite: Suite::$suite,
            name: stringify!($name),
            exhaustive: false,
            run: $name,
        }
    };
    ($suite:ident, $name:ident, once) => {
        Property {
            suite: Suite::$suite,
            name: stringify!($name),
            exhaustive: true,
            run: $name,
        }
    };
}

pub static PROPERTIES: &[Property] = &[
    prop!(Algebra, op_partial_delta, once),
    prop!(Algebra, leibniz_multi_rule),
    prop!(Algebra, right_leibniz),
    prop!(Algebra, left_derivation),
    prop!(Algebra, graded_commutativity),
    prop!(Algebra, taylor_split_orders),
    prop!(Diffop, decomposition_round_trip),
    prop!(Diffop, dual_pairing, once),
    prop!(Diffop, frame_operator_direct),
    prop!(Diffop, bracket_lowers_order),
    prop!(Diffop, composition),
    prop!(Diffop, order_violation_witness),
    prop!(Diffop, bracket_flavors),
    prop!(Symbol, symbol_kernel),
    prop!(Symbol, symbol_surjective),
    prop!(Symbol, symbol_on_differentials),
    prop!(Symbol, sn_skew_symmetry),
    prop!(Symbol, sn_leibniz),
    prop!(Symbol, sn_jacobi),
    prop!(Symbol, sn_function_rule),
    prop!(Symbol, sn_vector_fields),
    prop!(Symbol, commutator_symbol),
    prop!(Symbol, commutator_symbol_worked, once),
    prop!(Symbol, atiyah_leibniz),
    prop!(Symbol, connection_rules),
    prop!(Symbol, curvature_tensorial),
    prop!(Symbol, curvature_worked, once),
    prop!(Jets, jet_factorization),
    prop!(Jets, projection_identities),
    prop!(Jets, rank_accounting, once),
    prop!(Jets, same_jet_criterion),
    prop!(Jets, point_consistency),
    prop!(Jets, pushforward_prolongation),
    prop!(Jets, odd_stabilization, once),
];

fn deg(f: &Poly) -> i64 {
    f.degree().unwrap_or(0)
}

fn tdeg(t: &SymTensor) -> i64 {
    t.degree().unwrap_or(0)
}

/// Tensor equality where zero tensors of any arity agree.
fn same_tensor(a: &SymTensor, b: &SymTensor) -> bool {
    a.coeffs() == b.coeffs() && (a.is_zero() || a.arity() == b.arity())
}

fn tadd(a: &SymTensor, b: &SymTensor) -> Result<SymTensor, Error> {
    if a.is_zero() {
        Ok(b.clone())
    } else if b.is_zero() {
        Ok(a.clone())
    } else {
        a.add(b)
    }
}

fn tensor_eq(c: &Case, expected: &SymTensor, actual: &SymTensor) -> R {
    c.ensure(same_tensor(expected, actual), || {
        (expected.to_string(), actual.to_string())
    })
}

// ---- algebra ----

fn op_partial_delta(c: &mut Case) -> R {
    for ctx in gen::corpus_contexts() {
        let idx = multi_indices_up_to(&ctx, 4);
        for i in &idx {
            for j in idx.iter().filter(|j| j.weight() <= i.weight()) {
                let actual = Poly::monomial(&ctx, j.clone(), Rational::one()).partial_op(i)?;
                let expected = if i == j {
                    Poly::constant(&ctx, Rational::from_integer(i.factorial()))
                } else {
                    Poly::zero(&ctx)
                };
                if actual != expected {
                    c.context(&ctx);
                    c.input("I", i);
                    c.input("J", j);
                    return c.eq(&expected, &actual);
                }
            }
        }
    }
    Ok(())
}

fn leibniz_multi_rule(c: &mut Case) -> R {
    let ctx = gen::context(&mut c.rng);
    let i = multi_indices_up_to(&ctx, 3)
        .choose(&mut c.rng)
        .cloned()
        .expect("nonempty");
    let f = gen::hom_function(&mut c.rng, &ctx, 3);
    let g = gen::poly(&mut c.rng, &ctx, 3, 3);
    c.context(&ctx);
    c.input("I", &i);
    c.input("f", &f);
    c.input("g", &g);
    let expected = (&f * &g).partial_op(&i)?;
    c.eq(&expected, &leibniz_multi(&i, &f, &g)?)
}

fn right_leibniz(c: &mut Case) -> R {
    let ctx = gen::context(&mut c.rng);
    let a = c.rng.gen_range(0..ctx.dim());
    let f = gen::hom_function(&mut c.rng, &ctx, 3);
    let g = gen::hom_function(&mut c.rng, &ctx, 3);
    c.context(&ctx);
    c.input("A", ctx.name(a));
    c.input("f", &f);
    c.input("g", &g);
    let e = MultiIndex::unit(ctx.dim(), a);
    let rp = c.right_partial;
    let lhs = rp(&(&f * &g), &e)?;
    let rhs = &(&f * &rp(&g, &e)?) + &(&rp(&f, &e)? * &g).signed(parity(ctx.degree(a) * deg(&g)));
    c.eq(&rhs, &lhs)?;
    // multi-index form: last coordinate first
    let i = multi_indices_up_to(&ctx, 3)
        .choose(&mut c.rng)
        .cloned()
        .expect("nonempty");
    c.input("I", &i);
    let mut step = f.clone();
    for a in i.letters().into_iter().rev() {
        step = rp(&step, &MultiIndex::unit(ctx.dim(), a))?;
    }
    c.eq(&step, &rp(&f, &i)?)
}

fn left_derivation(c: &mut Case) -> R {
    let ctx = gen::context(&mut c.rng);
    let a = c.rng.gen_range(0..ctx.dim());
    let f = gen::hom_function(&mut c.rng, &ctx, 3);
    let g = gen::poly(&mut c.rng, &ctx, 3, 3);
    c.context(&ctx);
    c.input("A", ctx.name(a));
    c.input("f", &f);
    c.input("g", &g);
    let lhs = (&f * &g).partial_left(a)?;
    let rhs = &(&f.partial_left(a)? * &g)
        + &(&f * &g.partial_left(a)?).signed(parity(ctx.degree(a) * deg(&f)));
    c.eq(&rhs, &lhs)
}

fn graded_commutativity(c: &mut Case) -> R {
    let ctx = gen::context(&mut c.rng);
    let f = gen::hom_function(&mut c.rng, &ctx, 3);
    let g = gen::hom_function(&mut c.rng, &ctx, 3);
    let h = gen::poly(&mut c.rng, &ctx, 2, 3);
    c.context(&ctx);
    c.input("f", &f);
    c.input("g", &g);
    c.input("h", &h);
    c.eq(&(&g * &f).signed(parity(deg(&f) * deg(&g))), &(&f * &g))?;
    c.eq(&(&f * &(&g * &h)), &(&(&f * &g) * &h))
}

fn taylor_split_orders(c: &mut Case) -> R {
    let ctx = gen::context(&mut c.rng);
    let f = gen::poly(&mut c.rng, &ctx, 3, 4);
    let a = gen::point(&mut c.rng, &ctx);
    let q = c.rng.gen_range(0..=3);
    c.context(&ctx);
    c.input("f", &f);
    c.input("point", format!("{:?}", a.values));
    c.input("q", q);
    let (t, r) = f.taylor_split(&a, q)?;
    c.eq(&f, &(&t + &r))?;
    let ro = r.order_at(&a)?;
    c.ensure(ro.is_none_or(|o| o > q), || {
        (format!("remainder order > {q}"), format!("{ro:?}"))
    })?;
    let vals = a.values_for(&ctx)?;
    let tw = t.shift(&vals).max_weight();
    c.ensure(tw.is_none_or(|w| w <= q), || {
        (format!("Taylor part weight ≤ {q}"), format!("{tw:?}"))
    })
}

// ---- diffop ----

fn decomposition_round_trip(c: &mut Case) -> R {
    let ctxs = gen::corpus_contexts();
    let ctx = &ctxs[(c.id / 2) % ctxs.len()];
    let b = gen::corpus_bundles(ctx)[c.id % 2].clone();
    let k = c.rng.gen_range(0..=3);
    let d = gen::operator(&mut c.rng, &b, k);
    c.context(ctx);
    c.input("D", &d);
    c.eq(&d, &extract_coeffs(&d, k)?)
}

fn dual_pairing(c: &mut Case) -> R {
    for ctx in gen::corpus_contexts() {
        for b in gen::corpus_bundles(&ctx) {
            let idx = multi_indices_up_to(&ctx, 2);
            let r = b.rank();
            for i in &idx {
                for j in &idx {
                    for (l, mu, kappa, rho) in (0..r * r * r * r)
                        .map(|n| (n % r, (n / r) % r, (n / r / r) % r, n / r / r / r))
                    {
                        let v = dual_pairing_check(&b, j, kappa, rho, i, l, mu)?;
                        let expected = if i == j && kappa == mu && l == rho {
                            Rational::from_integer(j.factorial())
                        } else {
                            Rational::from_integer(0.into())
                        };
                        if v != expected {
                            c.context(&ctx);
                            c.input("I", i);
                            c.input("J", j);
                            c.input("fibers", format!("λ={l} μ={mu} κ={kappa} ρ={rho}"));
                            return c.eq(&expected, &v);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn frame_operator_direct(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let i = multi_indices_up_to(&ctx, 3)
        .choose(&mut c.rng)
        .cloned()
        .expect("nonempty");
    let (l, mu) = (c.rng.gen_range(0..b.rank()), c.rng.gen_range(0..b.rank()));
    let psi = gen::section(&mut c.rng, &b);
    c.context(&ctx);
    c.input("I", &i);
    c.input("ψ", &psi);
    let table = DiffOperator::frame_operator(&b, &i, l, mu)?.apply(&psi)?;
    c.eq(&FrameOperatorMap::new(&b, &i, l, mu)?.apply(&psi)?, &table)
}

fn bracket_lowers_order(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let k = c.rng.gen_range(1..=3);
    let d = gen::operator(&mut c.rng, &b, k);
    let f = gen::hom_function(&mut c.rng, &ctx, 2);
    let psi = gen::section(&mut c.rng, &b);
    c.context(&ctx);
    c.input("D", &d);
    c.input("f", &f);
    c.input("ψ", &psi);
    let br = bracket_mult(&d, &f)?;
    let expected = d
        .apply(&psi.act(&f)?)?
        .sub(&d.apply(&psi)?.act(&f)?.signed(parity(d.degree() * deg(&f))));
    c.eq(&expected, &br.apply(&psi)?)
}

fn composition(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let k1 = c.rng.gen_range(0..=3);
    let k2 = c.rng.gen_range(0..=3 - k1);
    let d1 = gen::operator(&mut c.rng, &b, k1);
    let d2 = gen::operator(&mut c.rng, &b, k2);
    let psi = gen::section(&mut c.rng, &b);
    c.context(b.ctx());
    c.input("D1", &d1);
    c.input("D2", &d2);
    c.input("ψ", &psi);
    c.eq(
        &d1.apply(&d2.apply(&psi)?)?,
        &compose(&d1, &d2)?.apply(&psi)?,
    )
}

fn order_violation_witness(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let k = c.rng.gen_range(1..=3);
    let d = gen::operator_between(&mut c.rng, &b, &b, k, true);
    if d.effective_order() != Some(k) {
        return Ok(());
    }
    c.context(b.ctx());
    c.input("D", &d);
    match extract_coeffs(&d, k - 1) {
        Err(Error::OrderViolation(w)) if w.claimed_order == (k - 1) as usize => Ok(()),
        other => Err(Fail::Mismatch {
            expected: format!("order violation at claimed order {}", k - 1),
            actual: format!("{other:?}"),
        }),
    }
}

fn bracket_flavors(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let k = c.rng.gen_range(1..=3);
    let j = c.rng.gen_range(1..=k);
    let d = gen::operator(&mut c.rng, &b, k);
    let fs: Vec<Poly> = (0..j)
        .map(|_| gen::hom_function(&mut c.rng, &ctx, 2))
        .collect();
    c.context(&ctx);
    c.input("D", &d);
    for (n, f) in fs.iter().enumerate() {
        c.input(&format!("f{}", n + 1), f);
    }
    let left = iterated_bracket(&d, &fs, Flavor::Left)?;
    let right = iterated_bracket(&d, &fs, Flavor::Right)?;
    let s: i64 = fs.iter().map(deg).sum();
    c.eq(&right.signed(parity(j as i64 + d.degree() * s)), &left)
}

// ---- symbol ----

fn symbol_kernel(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let k = c.rng.gen_range(0..=3);
    let mut d = gen::operator(&mut c.rng, &b, k);
    if c.rng.gen_bool(0.5) {
        let lower: Vec<_> = d
            .coeffs()
            .iter()
            .filter(|((i, _, _), _)| i.weight() < k)
            .map(|(key, p)| (key.clone(), p.clone()))
            .collect();
        d = DiffOperator::endo(&b, k, d.degree(), lower)?;
    }
    c.context(b.ctx());
    c.input("D", &d);
    let s = symbol(&d)?;
    let below = d.effective_order().is_none_or(|e| e < k);
    c.ensure(s.is_zero() == below, || {
        (format!("symbol vanishes: {below}"), format!("symbol = {s}"))
    })
}

fn symbol_surjective(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let k = c.rng.gen_range(0..=2);
    let f = gen::symbol_map(&mut c.rng, &b, k);
    c.context(b.ctx());
    c.input("F", &f);
    c.eq(&f, &symbol(&build_from_symbol(&f)?)?)
}

fn symbol_on_differentials(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let k = c.rng.gen_range(0..=2);
    let d = gen::operator(&mut c.rng, &b, k);
    let fs: Vec<Poly> = (0..k)
        .map(|_| gen::hom_function(&mut c.rng, &ctx, 2))
        .collect();
    let psi = gen::section(&mut c.rng, &b);
    c.context(&ctx);
    c.input("D", &d);
    for (n, f) in fs.iter().enumerate() {
        c.input(&format!("f{}", n + 1), f);
    }
    c.input("ψ", &psi);
    let mut omega = SymTensor::function(&Poly::one(&ctx), Variance::Form);
    for f in &fs {
        omega = omega.product(&SymTensor::differential(f)?)?;
    }
    let s: i64 = fs.iter().map(deg).sum();
    let expected = iterated_left(&d, &fs, &psi)?;
    let actual = symbol(&d)?
        .apply_form(&omega)?
        .apply(&psi)?
        .signed(parity(s));
    c.eq(&expected, &actual)
}

fn three_multivectors(c: &mut Case) -> (Ctx, [SymTensor; 3]) {
    let ctx = if c.rng.gen_bool(0.5) {
        gen::corpus_contexts()
            .choose(&mut c.rng)
            .cloned()
            .expect("nonempty")
    } else {
        gen::context(&mut c.rng)
    };
    let mut t = || {
        let a = c.rng.gen_range(0..=2);
        gen::multivector(&mut c.rng, &ctx, a)
    };
    let xs = [t(), t(), t()];
    c.context(&ctx);
    c.input("X", &xs[0]);
    c.input("Y", &xs[1]);
    c.input("Z", &xs[2]);
    (ctx, xs)
}

fn sn_skew_symmetry(c: &mut Case) -> R {
    let (_, [x, y, _]) = three_multivectors(c);
    let lhs = sn_bracket(&x, &y)?;
    let rhs = sn_bracket(&y, &x)?.signed(!parity(tdeg(&x) * tdeg(&y)));
    tensor_eq(c, &rhs, &lhs)
}

fn sn_leibniz(c: &mut Case) -> R {
    let (_, [x, y, z]) = three_multivectors(c);
    let lhs = sn_bracket(&x, &y.product(&z)?)?;
    let a = sn_bracket(&x, &y)?.product(&z)?;
    let b = y
        .product(&sn_bracket(&x, &z)?)?
        .signed(parity(tdeg(&x) * tdeg(&y)));
    tensor_eq(c, &tadd(&a, &b)?, &lhs)
}

fn sn_jacobi(c: &mut Case) -> R {
    let (_, [x, y, z]) = three_multivectors(c);
    let lhs = sn_bracket(&x, &sn_bracket(&y, &z)?)?;
    let a = sn_bracket(&sn_bracket(&x, &y)?, &z)?;
    let b = sn_bracket(&y, &sn_bracket(&x, &z)?)?.signed(parity(tdeg(&x) * tdeg(&y)));
    tensor_eq(c, &tadd(&a, &b)?, &lhs)
}

fn sn_function_rule(c: &mut Case) -> R {
    let ctx = gen::context(&mut c.rng);
    let f = gen::hom_function(&mut c.rng, &ctx, 2);
    let a = c.rng.gen_range(1..=2);
    let x = gen::multivector(&mut c.rng, &ctx, a);
    c.context(&ctx);
    c.input("f", &f);
    c.input("X", &x);
    let lhs = sn_bracket(&SymTensor::function(&f, Variance::Multivector), &x)?;
    let rhs = SymTensor::interior(&SymTensor::differential(&f)?, &x)?.signed(!parity(deg(&f)));
    tensor_eq(c, &rhs, &lhs)
}

fn sn_vector_fields(c: &mut Case) -> R {
    let ctx = gen::context(&mut c.rng);
    let x = gen::multivector(&mut c.rng, &ctx, 1);
    let y = gen::multivector(&mut c.rng, &ctx, 1);
    let g = gen::poly(&mut c.rng, &ctx, 3, 3);
    c.context(&ctx);
    c.input("X", &x);
    c.input("Y", &y);
    c.input("g", &g);
    let br = sn_bracket(&x, &y)?;
    let lhs = if br.is_zero() {
        Poly::zero(&ctx)
    } else {
        br.apply_vector_field(&g)?
    };
    let xy = x.apply_vector_field(&y.apply_vector_field(&g)?)?;
    let yx = y.apply_vector_field(&x.apply_vector_field(&g)?)?;
    c.eq(&(&xy - &yx.signed(parity(tdeg(&x) * tdeg(&y)))), &lhs)
}

fn scalar_operator(
    c: &mut Case,
    b: &crate::gvb::Bundle,
    x: &SymTensor,
) -> Result<DiffOperator, Fail> {
    let top = build_from_symbol(&i_embed(x, b)?)?;
    let lower = gen::lower_operator(&mut c.rng, b, x.arity(), top.degree());
    Ok(top.add(&lower)?)
}

fn commutator_symbol(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let k = c.rng.gen_range(0..=3);
    let m = c.rng.gen_range(0..=3 - k);
    let x = gen::multivector(&mut c.rng, &ctx, k);
    let y = gen::multivector(&mut c.rng, &ctx, m);
    let d1 = scalar_operator(c, &b, &x)?;
    let d2 = scalar_operator(c, &b, &y)?;
    c.context(&ctx);
    c.input("D", &d1);
    c.input("D'", &d2);
    let r = commutator_symbol_check(&d1, &d2)?;
    tensor_eq(c, &r.rhs, &r.lhs)
}

fn commutator_symbol_worked(c: &mut Case) -> R {
    let ctx = CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("p", 2)])?;
    let line = BundleSpec::line(&ctx);
    let dx = DiffOperator::coordinate_derivative(&line, 0)?;
    let xdx = compose(
        &DiffOperator::multiplication(&line, &Poly::var(&ctx, 0))?,
        &dx,
    )?;
    c.context(&ctx);
    c.input("D", &xdx);
    c.input("D'", &dx);
    let r = commutator_symbol_check(&xdx, &dx)?;
    c.eq(&dx.neg(), &r.commutator)?;
    let expected = SymTensor::coordinate_field(&ctx, 0).neg();
    tensor_eq(c, &expected, &r.lhs)?;
    tensor_eq(c, &expected, &r.rhs)
}

fn atiyah_leibniz(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let x = gen::multivector(&mut c.rng, &ctx, 1);
    let y = gen::multivector(&mut c.rng, &ctx, 1);
    let d1 = scalar_operator(c, &b, &x)?;
    let d2 = scalar_operator(c, &b, &y)?;
    let f = gen::hom_function(&mut c.rng, &ctx, 2);
    c.context(&ctx);
    c.input("D", &d1);
    c.input("D'", &d2);
    c.input("f", &f);
    let xf = if x.is_zero() {
        Poly::zero(&ctx)
    } else {
        x.apply_vector_field(&f)?
    };
    c.eq(
        &DiffOperator::multiplication(&b, &xf)?,
        &bracket_mult(&d1, &f)?,
    )?;
    let lhs = commutator(&d1, &d2.mul_left(&f)?)?;
    let rhs = d2.mul_left(&xf)?.add(
        &commutator(&d1, &d2)?
            .mul_left(&f)?
            .signed(parity(d1.degree() * deg(&f))),
    )?;
    c.eq(&rhs, &lhs)
}

fn connection_rules(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let conn = gen::connection(&mut c.rng, &b);
    let x = gen::multivector(&mut c.rng, &ctx, 1);
    let f = gen::hom_function(&mut c.rng, &ctx, 2);
    let psi = gen::section(&mut c.rng, &b);
    c.context(&ctx);
    c.input("∇", format!("{:?}", conn.gamma()));
    c.input("X", &x);
    c.input("f", &f);
    c.input("ψ", &psi);
    let nx = conn.along(&x)?;
    let fx = SymTensor::function(&f, Variance::Multivector).product(&x)?;
    c.eq(&nx.apply(&psi)?.act(&f)?, &conn.along(&fx)?.apply(&psi)?)?;
    let xf = if x.is_zero() {
        Poly::zero(&ctx)
    } else {
        x.apply_vector_field(&f)?
    };
    let expected = psi
        .act(&xf)?
        .add(&nx.apply(&psi)?.act(&f)?.signed(parity(tdeg(&x) * deg(&f))));
    c.eq(&expected, &nx.apply(&psi.act(&f)?)?)
}

fn curvature_tensorial(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let conn = gen::connection(&mut c.rng, &b);
    let x = gen::multivector(&mut c.rng, &ctx, 1);
    let y = gen::multivector(&mut c.rng, &ctx, 1);
    let f = gen::hom_function(&mut c.rng, &ctx, 2);
    c.context(&ctx);
    c.input("∇", format!("{:?}", conn.gamma()));
    c.input("X", &x);
    c.input("Y", &y);
    c.input("f", &f);
    let r = curvature(&conn, &x, &y)?;
    let fx = SymTensor::function(&f, Variance::Multivector).product(&x)?;
    c.eq(&r.mul_left(&f)?, &curvature(&conn, &fx, &y)?)?;
    let swapped = curvature(&conn, &y, &x)?;
    c.eq(&r.signed(!parity(tdeg(&x) * tdeg(&y))), &swapped)
}

fn curvature_worked(c: &mut Case) -> R {
    let ctx = CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("η", -1)])?;
    let line = BundleSpec::line(&ctx);
    let conn = Connection::new(
        &line,
        [
            ((1, 0, 0), Poly::var(&ctx, 2)),
            ((2, 0, 0), Poly::var(&ctx, 1)),
        ],
    )?;
    c.context(&ctx);
    c.input("∇", "∇_θ = ∂_θ + λ_η, ∇_η = ∂_η + λ_θ");
    let f = |a| SymTensor::coordinate_field(&ctx, a);
    c.eq(
        &DiffOperator::identity(&line).scale(&int(2)),
        &curvature(&conn, &f(1), &f(2))?,
    )?;
    c.eq(
        &DiffOperator::zero(&line, &line, 0, 0),
        &curvature(&conn, &f(0), &f(1))?,
    )
}

// ---- jets ----

fn jet_factorization(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let k = c.rng.gen_range(0..=3);
    let dk = c.rng.gen_range(0..=k);
    let d = gen::operator(&mut c.rng, &b, dk);
    let psi = gen::section(&mut c.rng, &b);
    c.context(b.ctx());
    c.input("D", &d);
    c.input("ψ", &psi);
    c.input("k", k);
    let j = prolong_with(&psi, k, c.right_partial)?;
    c.eq(&d.apply(&psi)?, &operator_on_jet(&d, &j)?)
}

fn random_jet(c: &mut Case, b: &crate::gvb::Bundle, k: u32) -> Result<JetVector, Fail> {
    let ctx = b.ctx();
    let idx = multi_indices_up_to(ctx, k);
    let mut coeffs = Vec::new();
    for _ in 0..c.rng.gen_range(0..=5) {
        let i = idx.choose(&mut c.rng).cloned().expect("nonempty");
        let l = c.rng.gen_range(0..b.rank());
        coeffs.push(((i, l), gen::poly(&mut c.rng, ctx, 2, 2)));
    }
    Ok(JetVector::new(b, k, coeffs)?)
}

fn projection_identities(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let k = c.rng.gen_range(0..=3);
    let l = c.rng.gen_range(0..=k);
    let q = c.rng.gen_range(0..=l);
    let psi = gen::section(&mut c.rng, &b);
    c.context(b.ctx());
    c.input("ψ", &psi);
    c.input("orders", format!("{k} ≥ {l} ≥ {q}"));
    let jk = prolong(&psi, k)?;
    c.eq(&prolong(&psi, l)?, &jk.project(l)?)?;
    c.eq(&jk, &jk.project(k)?)?;
    let j = random_jet(c, &b, k)?;
    c.input("j", &j);
    c.eq(&j.project(q)?, &j.project(l)?.project(q)?)
}

/// Multi-indices with weight ≤ `k` (or exactly `k`) by scanning the full
/// exponent box.
fn brute_indices(ctx: &CoordinateContext, k: u32, exact: bool) -> Vec<Vec<u32>> {
    let n = ctx.dim();
    let caps: Vec<u32> = (0..n).map(|a| if ctx.is_odd(a) { 1 } else { k }).collect();
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    loop {
        let w: u32 = cur.iter().sum();
        if (exact && w == k) || (!exact && w <= k) {
            out.push(cur.clone());
        }
        let mut a = 0;
        loop {
            if a == n {
                return out;
            }
            if cur[a] < caps[a] {
                cur[a] += 1;
                break;
            }
            cur[a] = 0;
            a += 1;
        }
    }
}

fn rank_accounting(c: &mut Case) -> R {
    for ctx in gen::corpus_contexts() {
        for b in gen::corpus_bundles(&ctx) {
            for k in 0..=3 {
                let mut q = BTreeMap::new();
                let mut ell = BTreeMap::new();
                for e in brute_indices(&ctx, k, false) {
                    let zi: i64 = e
                        .iter()
                        .enumerate()
                        .map(|(a, &x)| ctx.degree(a) * i64::from(x))
                        .sum();
                    for l in 0..b.rank() {
                        *q.entry(zi + b.fiber_degree(l)).or_insert(0usize) += 1;
                        for mu in 0..b.rank() {
                            *ell.entry(b.fiber_degree(mu) - b.fiber_degree(l) - zi)
                                .or_insert(0usize) += 1;
                        }
                    }
                }
                c.context(&ctx);
                c.input("bundle", format!("{:?}", b.fiber()));
                c.input("k", k);
                c.eq(&q, &jet_rank(&b, k))?;
                c.eq(&ell, &diff_rank(&b, k))?;
                if k > 0 {
                    c.eq(
                        &jet_rank(&b, k),
                        &add_ranks(&jet_rank(&b, k - 1), &hom_sk_rank(&b, k)),
                    )?;
                }
                let exact = brute_indices(&ctx, k, true).len() * b.rank();
                c.eq(&exact, &total_rank(&hom_sk_rank(&b, k)))?;
                c.inputs.clear();
            }
        }
    }
    for n in 1..=3usize {
        let names = ["x", "y", "z"];
        let pairs: Vec<(&str, i64)> = names[..n].iter().map(|s| (*s, 0)).collect();
        let ctx = CoordinateContext::from_pairs(&pairs)?;
        for r in 1..=3usize {
            let fiber: Vec<(String, i64)> = (0..r).map(|l| (format!("e{l}"), 0)).collect();
            let refs: Vec<(&str, i64)> = fiber.iter().map(|(s, d)| (s.as_str(), *d)).collect();
            let b = BundleSpec::from_pairs(&ctx, &refs)?;
            for k in 1..=3u32 {
                let expected = r * binomial(n as u32 + k, k)
                    .to_string()
                    .parse::<usize>()
                    .expect("small");
                let got = jet_rank(&b, k);
                c.context(&ctx);
                c.input("(n, r, k)", format!("({n}, {r}, {k})"));
                c.eq(&BTreeMap::from([(0i64, expected)]), &got)?;
                c.inputs.clear();
            }
        }
    }
    Ok(())
}

fn same_jet_criterion(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let psi = gen::section(&mut c.rng, &b);
    let a = gen::point(&mut c.rng, &ctx);
    let k = c.rng.gen_range(0..=3);
    let vals = a.values_for(&ctx)?;
    let h = if c.rng.gen_bool(0.5) {
        // a product of k + 1 generators of the ideal at a, times junk
        let mut g = gen::poly(&mut c.rng, &ctx, 1, 2);
        if g.is_zero() {
            g = Poly::one(&ctx);
        }
        for _ in 0..=k {
            let s = c.rng.gen_range(0..ctx.dim());
            let gen_s = &Poly::var(&ctx, s) - &Poly::constant(&ctx, vals[s].clone());
            g = &g * &gen_s;
        }
        let l = c.rng.gen_range(0..b.rank());
        Section::single(&b, l, g)
    } else {
        gen::section(&mut c.rng, &b)
    };
    c.context(&ctx);
    c.input("ψ", &psi);
    c.input("h", &h);
    c.input("point", format!("{:?}", a.values));
    c.input("k", k);
    let same = jet_at_point(&psi, k, &a)?.values == jet_at_point(&psi.add(&h), k, &a)?.values;
    let member = vanishes_to_order(&h, k, &a)?;
    c.ensure(same == member, || {
        (
            format!("same jet ⇔ h ∈ ideal power (ideal: {member})"),
            format!("same jet: {same}"),
        )
    })
}

fn point_consistency(c: &mut Case) -> R {
    let b = gen::setting(&mut c.rng);
    let ctx = b.ctx().clone();
    let psi = gen::section(&mut c.rng, &b);
    let a = gen::point(&mut c.rng, &ctx);
    let k = c.rng.gen_range(0..=3);
    c.context(&ctx);
    c.input("ψ", &psi);
    c.input("point", format!("{:?}", a.values));
    c.input("k", k);
    let jp = jet_at_point(&psi, k, &a)?;
    let j = prolong(&psi, k)?;
    for ((i, l), v) in &jp.values {
        let body = j.coeff(i, *l).evaluate_body(&a)?;
        let scaled = body * Rational::from_integer(i.factorial());
        let scaled = if i.weight() % 2 == 1 { -scaled } else { scaled };
        c.eq(v, &scaled)?;
    }
    Ok(())
}

fn pushforward_prolongation(c: &mut Case) -> R {
    let src = gen::setting(&mut c.rng);
    let ctx = src.ctx().clone();
    let tgt = if c.rng.gen_bool(0.5) {
        src.clone()
    } else {
        gen::bundle(&mut c.rng, &ctx)
    };
    let f = gen::bundle_map(&mut c.rng, &src, &tgt);
    let psi = gen::section(&mut c.rng, &src);
    let k = c.rng.gen_range(0..=2);
    c.context(&ctx);
    c.input("F", format!("{:?}", f.matrix));
    c.input("ψ", &psi);
    c.input("k", k);
    let j = prolong(&psi, k)?;
    c.eq(&prolong(&f.apply(&psi)?, k)?, &jet_pushforward(&f, &j)?)?;
    c.eq(&j, &jet_pushforward(&BundleMap::identity(&src), &j)?)
}

fn odd_stabilization(c: &mut Case) -> R {
    let mut ctxs = vec![CoordinateContext::from_pairs(&[("θ1", 1), ("θ2", 1)])?];
    ctxs.push(gen::odd_context(&mut c.rng));
    for ctx in ctxs {
        let n = ctx.dim() as u32;
        for b in gen::corpus_bundles(&ctx) {
            c.context(&ctx);
            c.input("bundle", format!("{:?}", b.fiber()));
            let stable = jet_rank(&b, n);
            for k in n + 1..=n + 3 {
                c.eq(&stable, &jet_rank(&b, k))?;
            }
            if n > 0 {
                c.ensure(jet_rank(&b, n - 1) != stable, || {
                    ("growth below n".into(), "no growth".into())
                })?;
            }
            c.inputs.clear();
        }
    }
    Ok(())
}
