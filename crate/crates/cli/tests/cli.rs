use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradedjet"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn apply_derivative() {
    let o = run(&[
        "--context",
        &data("line_x.json"),
        "apply",
        "--operator",
        &data("dx.json"),
        "--section",
        &data("x_squared.json"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2x · e");
}

#[test]
fn prolong_square() {
    let o = run(&[
        "--context",
        &data("line_x.json"),
        "prolong",
        "--section",
        &data("x_squared.json"),
        "--order",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "j^(0)_e = x^2\nj^(1)_e = -2x");
}

#[test]
fn json_output_parses_back() {
    let o = run(&[
        "--context",
        &data("line_x.json"),
        "--json",
        "decompose",
        "--operator",
        &data("dx.json"),
        "--operator",
        &data("x_dx.json"),
        "--order",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["order"], 2);
    let dir = std::env::temp_dir().join(format!("gradedjet-roundtrip-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("op.json");
    std::fs::write(&file, stdout(&o)).unwrap();
    let again = run(&[
        "--context",
        &data("line_x.json"),
        "--json",
        "decompose",
        "--operator",
        file.to_str().unwrap(),
        "--order",
        "2",
    ]);
    assert_eq!(stdout(&again), stdout(&o));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn bracket_of_worked_pair() {
    let o = run(&[
        "--context",
        &data("line_x.json"),
        "bracket",
        "--left",
        &data("x_dx.json"),
        "--right",
        &data("dx.json"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "[D^(1)]^e_e = -1");
}

#[test]
fn bad_input_names_the_path() {
    let o = run(&[
        "--context",
        &data("line_x.json"),
        "apply",
        "--operator",
        &data("bad_lambda.json"),
        "--section",
        &data("x_squared.json"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad_lambda.json:$.coeffs[0].lambda"), "{err}");
}

#[test]
fn missing_file_is_an_input_error() {
    let o = run(&[
        "--context",
        "/nonexistent/ctx.json",
        "rank",
        "--kind",
        "jet",
        "--order",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn understated_order_is_a_contract_violation() {
    let o = run(&[
        "--context",
        &data("line_x.json"),
        "decompose",
        "--operator",
        &data("dx.json"),
        "--operator",
        &data("dx.json"),
        "--order",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr)
        .unwrap()
        .contains("order violation"));
}

#[test]
fn check_reports_to_stdout_and_time_to_stderr() {
    let o = run(&["check", "--suite", "algebra", "--cases", "3", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("0 failures\n"));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("elapsed:"));
}
