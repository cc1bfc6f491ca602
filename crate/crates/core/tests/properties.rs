use gradedjet::diffop::{extract_coeffs, DiffOperator};
use gradedjet::gcore::parity;
use gradedjet::gvb::{BundleSpec, Section};
use gradedjet::jets::{operator_on_jet, prolong};
use gradedjet::{CoordinateContext, Ctx, MultiIndex, Poly, Rational};
use num_rational::BigRational;
use proptest::prelude::*;

fn ctx() -> Ctx {
    CoordinateContext::from_pairs(&[("x", 0), ("θ", 1), ("p", 2), ("η", -1)]).unwrap()
}

fn term() -> impl Strategy<Value = (Vec<u32>, i64, i64)> {
    (
        (0u32..3, 0u32..2, 0u32..2, 0u32..2).prop_map(|(a, b, c, d)| vec![a, b, c, d]),
        -4i64..5,
        1i64..4,
    )
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(term(), 0..4).prop_map(|ts| {
        let c = ctx();
        Poly::from_terms(
            &c,
            ts.into_iter()
                .map(|(e, n, d)| (MultiIndex(e), BigRational::new(n.into(), d.into()))),
        )
        .unwrap()
    })
}

/// The homogeneous piece of lowest degree.
fn hom(p: Poly) -> Poly {
    p.pieces().into_values().next().unwrap_or(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_graded_commutative(f in poly().prop_map(hom), g in poly().prop_map(hom)) {
        let s = parity(f.degree().unwrap_or(0) * g.degree().unwrap_or(0));
        prop_assert_eq!(&f * &g, (&g * &f).signed(s));
    }

    #[test]
    fn product_is_associative(f in poly(), g in poly(), h in poly()) {
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
    }

    #[test]
    fn derivatives_of_odd_coordinates_square_to_zero(f in poly()) {
        prop_assert!(f.partial_left(1).unwrap().partial_left(1).unwrap().is_zero());
        prop_assert!(f.partial_left(3).unwrap().partial_left(3).unwrap().is_zero());
    }

    #[test]
    fn taylor_parts_add_up(f in poly(), a in -3i64..4, q in 0u32..4) {
        let pt = gradedjet::Point::new([("x".to_string(), Rational::from_integer(a.into()))]);
        let (t, r) = f.taylor_split(&pt, q).unwrap();
        prop_assert_eq!(&t + &r, f);
        prop_assert!(r.order_at(&pt).unwrap().is_none_or(|o| o > q));
    }

    #[test]
    fn operators_factor_through_jets(c0 in poly(), c1 in poly(), psi0 in poly(), psi1 in poly()) {
        let c = ctx();
        let b = BundleSpec::from_pairs(&c, &[("e0", 0), ("e1", 1)]).unwrap();
        // degree-0 coefficients at (x, e0←e0) and (θ, e1←e0)
        let a = c0.pieces().remove(&0).unwrap_or_else(|| Poly::zero(&c));
        let t = c1.pieces().remove(&0).unwrap_or_else(|| Poly::zero(&c));
        let d = DiffOperator::endo(
            &b,
            2,
            0,
            [
                ((MultiIndex(vec![1, 0, 0, 0]), 0, 0), a),
                ((MultiIndex(vec![0, 1, 0, 0]), 1, 0), t),
            ],
        )
        .unwrap();
        let psi = Section::new(&b, vec![psi0, psi1]).unwrap();
        prop_assert_eq!(operator_on_jet(&d, &prolong(&psi, 2).unwrap()).unwrap(), d.apply(&psi).unwrap());
        prop_assert_eq!(extract_coeffs(&d, 2).unwrap(), d);
    }
}
