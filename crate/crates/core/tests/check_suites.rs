use gradedjet::check::{Runner, Suite};
use gradedjet::jets::RightPartial;
use gradedjet::{MultiIndex, Poly, Result};

#[test]
fn every_suite_passes() {
    let report = Runner::new(7, 40).run(&Suite::ALL, "all");
    assert!(report.passed(), "{report}");
}

#[test]
fn parallel_and_sequential_reports_agree() {
    let a = Runner::new(3, 12).run(&[Suite::Diffop], "diffop");
    let b = Runner::new(3, 12)
        .sequential()
        .run(&[Suite::Diffop], "diffop");
    assert_eq!(a.to_string(), b.to_string());
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

/// Right derivative with the parity sign dropped.
fn unsigned_right(f: &Poly, i: &MultiIndex) -> Result<Poly> {
    f.partial_op(i)
}

#[test]
fn sign_bug_in_right_derivative_is_caught() {
    let bug: RightPartial = unsigned_right;
    let report = Runner::new(1, 60)
        .with_right_partial(bug)
        .run(&[Suite::Algebra, Suite::Jets], "mutant");
    assert!(!report.passed());
    let f = &report.failures[0];
    assert!(f.witness.context.is_some());
    assert!(!f.witness.inputs.is_empty());
    assert!(report
        .failures
        .iter()
        .any(|f| f.property == "jets/jet_factorization"));
}
