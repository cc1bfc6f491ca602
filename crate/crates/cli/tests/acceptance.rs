//! Acceptance criteria. Prints one PASS/FAIL line per criterion, then
//! asserts that every line passed.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use gradedjet::check::Runner;

const SEED: u64 = 20_241_016;

struct Outcome {
    ok: bool,
    note: String,
}

fn props(names: &[(&str, usize)]) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, cases) in names {
        let report = Runner::new(SEED, *cases)
            .run_named(name)
            .unwrap_or_else(|| panic!("no property {name}"));
        if !report.passed() {
            ok = false;
            notes.push(report.to_string());
        }
        notes.push(format!("{name}: {} cases", report.cases));
    }
    Outcome {
        ok,
        note: notes.join(", "),
    }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gradedjet"))
        .args(args)
        .output()
        .expect("run gradedjet")
}

fn rank_json(ctx: &str, kind: &str, order: &str) -> serde_json::Value {
    let ctx = data(ctx);
    let out = cli(&[
        "--context",
        ctx.to_str().unwrap(),
        "--json",
        "rank",
        "--kind",
        kind,
        "--order",
        order,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("rank output is JSON")
}

fn cli_determinism() -> Outcome {
    let seed = SEED.to_string();
    let args = ["check", "--suite", "all", "--seed", &seed, "--cases", "20"];
    let a = cli(&args);
    let b = cli(&args);
    let mut ok = a.status.success() && b.status.success() && a.stdout == b.stdout;
    let mut note = vec![format!("check reports identical: {}", a.stdout == b.stdout)];

    let jet = rank_json("xtp.json", "jet", "1");
    let diff = rank_json("xtp.json", "diff", "1");
    let plane = rank_json("plane.json", "jet", "2");
    let want_jet = serde_json::json!({"0": 2, "1": 1, "2": 1});
    let want_diff = serde_json::json!({"0": 2, "-1": 1, "-2": 1});
    for (label, got, want) in [
        ("jet (x,θ,p) k=1", &jet["ranks"], &want_jet),
        ("diff (x,θ,p) k=1", &diff["ranks"], &want_diff),
        (
            "jet (x,y) k=2 total",
            &plane["total"],
            &serde_json::json!(6),
        ),
    ] {
        let m = got == want;
        ok &= m;
        note.push(format!("{label}: {got}"));
    }
    Outcome {
        ok,
        note: note.join(", "),
    }
}

type Criterion = (u32, &'static str, Duration, Box<dyn Fn() -> Outcome>);

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let criteria: Vec<Criterion> = vec![
        (
            1,
            "ordered partials of coordinate monomials",
            s(1),
            Box::new(|| props(&[("op_partial_delta", 1)])),
        ),
        (
            2,
            "multi-index Leibniz rule vs iterated differentiation",
            s(10),
            Box::new(|| props(&[("leibniz_multi_rule", 200)])),
        ),
        (
            3,
            "decomposition round trip, 100 operators per bundle",
            s(30),
            Box::new(|| props(&[("decomposition_round_trip", 200)])),
        ),
        (
            4,
            "dual pairing on frame operators",
            s(5),
            Box::new(|| props(&[("dual_pairing", 1)])),
        ),
        (
            5,
            "symbol kernel and surjectivity",
            s(10),
            Box::new(|| props(&[("symbol_kernel", 100), ("symbol_surjective", 100)])),
        ),
        (
            6,
            "Schouten–Nijenhuis skew symmetry, Leibniz and Jacobi",
            s(30),
            Box::new(|| {
                props(&[
                    ("sn_skew_symmetry", 100),
                    ("sn_leibniz", 100),
                    ("sn_jacobi", 100),
                ])
            }),
        ),
        (
            7,
            "symbol of a commutator is the bracket of symbols",
            s(60),
            Box::new(|| props(&[("commutator_symbol", 100), ("commutator_symbol_worked", 1)])),
        ),
        (
            8,
            "Atiyah Leibniz identity and curvature",
            s(10),
            Box::new(|| {
                props(&[
                    ("atiyah_leibniz", 100),
                    ("connection_rules", 100),
                    ("curvature_tensorial", 100),
                    ("curvature_worked", 1),
                ])
            }),
        ),
        (
            9,
            "operators factor through prolongation",
            s(30),
            Box::new(|| props(&[("jet_factorization", 200)])),
        ),
        (
            10,
            "jet projection identities",
            s(5),
            Box::new(|| props(&[("projection_identities", 100)])),
        ),
        (
            11,
            "graded rank accounting",
            s(5),
            Box::new(|| props(&[("rank_accounting", 1)])),
        ),
        (
            12,
            "same-jet criterion",
            s(10),
            Box::new(|| props(&[("same_jet_criterion", 100)])),
        ),
        (
            13,
            "all-odd jet ranks stabilize",
            s(1),
            Box::new(|| props(&[("odd_stabilization", 1)])),
        ),
        (
            14,
            "CLI determinism and rank examples",
            s(5),
            Box::new(cli_determinism),
        ),
    ];

    let mut failed = Vec::new();
    for (n, desc, limit, run) in &criteria {
        let start = Instant::now();
        let out = run();
        let t = start.elapsed();
        let pass = out.ok && t < *limit;
        println!(
            "{} {n:>2} {desc} ({:.3}s / {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            t.as_secs_f64(),
            limit.as_secs(),
            out.note
        );
        if !pass {
            failed.push(*n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
