//! The `parconj` binary: outputs, exit statuses, and round trips.

use std::process::{Command, Output};

use serde_json::Value;

use parabolic::calculus::FieldContext;
use parabolic::cli::{eval::evaluate, parse::parse};
use parabolic::exponents::{Exponent, LogLexExp, RationalExp};
use parabolic::series::Series;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parconj")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Status and trimmed standard output.
fn text(args: &[&str]) -> (i32, String) {
    let out = run(args);
    (out.status.code().unwrap(), stdout(&out).trim_end().to_string())
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = run(&[&["--format", "json"], args].concat());
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?} {e}: {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), v)
}

#[test]
fn evaluates_expressions() {
    assert_eq!(text(&["eval", "x + 1 + 3*x^(-1/2)"]), (0, "x + 1 + 3*x^(-1/2)".into()));
    assert_eq!(text(&["eval", "x^(1/2)*x^(1/3)"]), (0, "x^(5/6)".into()));
    assert_eq!(text(&["eval", "(1+1/x)^2"]), (0, "1 + 2*x^(-1) + x^(-2)".into()));
    assert_eq!(text(&["eval", "x + x^(-2/3)"]), (0, "x + x^(-2/3)".into()));
    assert_eq!(text(&["--cutoff", "-3", "eval", "1/(x-1)"]), (0, "x^(-1) + x^(-2) + O(x^(-3))".into()));
    assert_eq!(text(&["--field", "tlog", "--depth", "2", "eval", "log(log(x))"]), (0, "log(log(x))".into()));
    assert_eq!(text(&["--field", "tlog", "eval", "1/(x*log(x))"]), (0, "x^(-1)*log(x)^(-1)".into()));
}

#[test]
fn options_precede_expressions() {
    assert_eq!(text(&["eval", "--cutoff", "-3", "1/(x-1)"]), text(&["--cutoff", "-3", "eval", "1/(x-1)"]));
    assert_eq!(text(&["eval", "-x^2", "--", "-1"]).0, 2);
    assert_eq!(text(&["eval", "-x^2"]), (0, "-x^2".into()));
    let out = run(&["eval", "1/(x-1)", "--cutoff=-3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("must come before"));
}

#[test]
fn calculus_commands() {
    assert_eq!(text(&["derive", "x^3 + x^(-1/2)"]), (0, "3*x^2 - 1/2*x^(-3/2)".into()));
    assert_eq!(text(&["bracket", "x^(-1)", "1"]), (0, "x^(-2)".into()));
    let (code, out) = text(&["--field", "tlog", "--extend-depth", "on", "asymint", "1/(x*log(x))"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("log(log(x))"));
    assert!(out.contains("depth: 1 -> 2"));
}

#[test]
fn parabolic_inverse_is_compositional() {
    let (code, out) = text(&["--cutoff", "-5", "invert", "--parabolic", "x + 1/x"]);
    assert_eq!((code, out.as_str()), (0, "x - x^(-1) - x^(-3) + O(x^(-5))"));
    let (code, out) = text(&["--cutoff", "-5", "invert", "x + 1/x"]);
    assert_eq!((code, out.as_str()), (0, "x^(-1) - x^(-3) + O(x^(-5))"));
}

#[test]
fn pseudo_gap_obstruction() {
    let (code, out) = text(&["conj-find", "--field", "k", "x+1", "x+1+1/x"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("verdict: NotConjugate"), "{out}");
    assert!(out.contains("obstruction: pseudo-gap at x^(-1)"), "{out}");
    let (code, v) = json(&["conj-find", "x+1", "x+1+1/x"]);
    assert_eq!(code, 1);
    assert_eq!(v["obstruction"]["exponent"], "-1");
    assert_eq!(v["trace"], Value::Array(vec![]));
}

#[test]
fn witness_from_text_output_verifies() {
    let args = ["--cutoff", "-12", "conj-find", "x+1", "x+1+x^(-2/3)"];
    let (code, out) = text(&args);
    assert_eq!(code, 0);
    assert!(out.starts_with("verdict: Conjugate"), "{out}");
    let witness = out.lines().find_map(|l| l.strip_prefix("witness: ")).expect("witness line");
    let series = out.lines().find_map(|l| l.strip_prefix("witness series: ")).expect("witness series line");
    let verify = |phi: &str, parabolic: bool| {
        let mode = if parabolic { "--parabolic" } else { "--cutoff=-12" };
        text(&["--cutoff", "-12", "verify", mode, "x+1", "x+1+x^(-2/3)", phi])
    };
    assert_eq!(verify(witness, false), (0, "verified".into()));
    assert_eq!(verify(series, true), (0, "verified".into()));
    assert_eq!(verify("-3*x^(1/3)", false), (1, "not verified".into()));
}

#[test]
fn decision_commands() {
    assert_eq!(text(&["--field", "tlog", "conj-check", "x + x/log(x)", "x + x/log(x) + x/log(x)^3"]).0, 0);
    assert_eq!(
        text(&["--field", "tlog", "conj-check", "x + x/log(x)", "x + x/log(x) + x/log(x)^2"]),
        (1, "NotConjugate".into())
    );
    // only a sufficient condition is known over K
    assert_eq!(text(&["conj-check", "x+1", "x+1+x^(-2/3)"]), (1, "Unknown".into()));
    assert_eq!(text(&["conj-check", "x+1", "x+1+x^(-3)"]).0, 0);
}

#[test]
fn exit_statuses() {
    let out = run(&["eval", "x +"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("byte 3") && err.contains("'('"), "{err}");
    assert_eq!(run(&["bracket", "x"]).status.code(), Some(2));
    assert_eq!(run(&["--field", "k", "--depth", "2", "eval", "x"]).status.code(), Some(2));
    assert_eq!(run(&["--cutoff", "oops", "eval", "x"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "log(x)"]).status.code(), Some(1));
    assert_eq!(run(&["--field", "tlog", "eval", "log(log(x))"]).status.code(), Some(1));
    assert_eq!(run(&["exp", "x^2"]).status.code(), Some(1));
}

#[test]
fn log_chains_need_a_log_cutoff() {
    let out = run(&["--field", "tlog", "--cutoff", "-3", "eval", "1/(log(x) - 1)"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("never reach the cutoff"));
    let (code, out) = text(&["--field", "tlog", "--cutoff", "0,-4", "eval", "1/(log(x) - 1)"]);
    assert_eq!((code, out.as_str()), (0, "log(x)^(-1) + log(x)^(-2) + log(x)^(-3) + O(log(x)^(-4))"));
}

fn json_round_trip<E: Exponent>(field: &str, input: &str, ctx: &FieldContext<E>, cutoff: &str) {
    let (code, v) = json(&["--field", field, "--cutoff", cutoff, "eval", input]);
    assert_eq!(code, 0);
    let decoded = Series::<E>::from_json(&v["result"]["series"]).unwrap();
    assert_eq!(decoded, evaluate(&parse(input).unwrap(), ctx).unwrap(), "{input}");
}

#[test]
fn json_output_decodes_to_the_same_series() {
    let k = FieldContext::rational().with_cutoff(RationalExp::int(-6));
    for input in ["x + 1 + 3*x^(-1/2)", "1/(x - 1)", "(4 + 4/x)^(1/2)", "-7/3*x^(-5/2)"] {
        json_round_trip("k", input, &k, "-6");
    }
    let t = FieldContext::loglex(parabolic::exponents::DepthPolicy::Fixed(1)).with_cutoff(LogLexExp::from_ints(&[-3]));
    for input in ["log(x^2 + x)", "x/log(x) + 1/(x*log(x))", "1/(x - log(x))"] {
        json_round_trip("tlog", input, &t, "-3");
    }
}

#[test]
fn rendering_parses_back() {
    let cases: [&[&str]; 6] = [
        &["--cutoff", "-4", "eval", "1/(x - 1)"],
        &["--cutoff", "-4", "eval", "(4 + 4/x)^(1/2)"],
        &["--cutoff", "-4", "exp", "x^(-1) + 2*x^(-3/2)"],
        &["--field", "tlog", "--cutoff", "-2", "eval", "log(x^2 + x)"],
        &["--field", "tlog", "--cutoff", "-2", "eval", "x/log(x) - 3/(x*log(x)^2)"],
        &["--field", "tlog", "--depth", "2", "--cutoff", "-2", "eval", "log(log(x)) + log(x)^(-1/2)"],
    ];
    for args in cases {
        let (code, rendered) = text(args);
        assert_eq!(code, 0);
        let mut again: Vec<&str> = args[..args.len() - 2].to_vec();
        again.extend(["eval", rendered.as_str()]);
        assert_eq!(text(&again), (0, rendered.clone()), "{args:?}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["--format", "json", "--cutoff", "-10", "conj-find", "x+1", "x+1+x^(-3/5)"];
    let first = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, run(&args).stdout);
}

#[test]
fn reads_expressions_from_a_file() {
    let path = std::env::temp_dir().join(format!("parconj-inputs-{}.txt", std::process::id()));
    std::fs::write(&path, "# reference\nx + 1\n\nx + 1 + 1/x\n").unwrap();
    let (code, out) = text(&["conj-find", "--in", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code, 1);
    assert!(out.starts_with("verdict: NotConjugate"), "{out}");
}
