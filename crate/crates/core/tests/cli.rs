mod common;

use std::path::Path;
use std::process::Command;

use common::{graph_path, model_path, FULL_TIME_FIXTURES, SCG_FIXTURES};
use scgid::cli::{self, EXIT_CAP, EXIT_COUNTEREXAMPLE, EXIT_NOT_IDENTIFIABLE, EXIT_OK, EXIT_OUT_OF_TOLERANCE, EXIT_UNKNOWN, EXIT_USAGE};
use scgid::io::{parse_graph, Loaded};
use scgid::simulation::{linear, Model};
use scgid::{CompatibilityClass, TemporalVertex};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("scgid").chain(args.iter().copied());
    let code = cli::run(argv.map(std::ffi::OsString::from), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn p(path: impl AsRef<Path>) -> String {
    path.as_ref().to_string_lossy().into_owned()
}

#[test]
fn check_commands() {
    let r = run(&["check-nde", "--graph", &p(graph_path("fig5c")), "--treatment", "X", "--lag", "1", "--outcome", "Y"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert!(r.out.contains("verdict: IDENTIFIABLE") && r.out.contains("estimand: "));

    let r = run(&["check-nde", "--graph", &p(graph_path("fig3a")), "--treatment", "X", "--lag", "1", "--outcome", "Y"]);
    assert_eq!(r.code, EXIT_UNKNOWN);
    assert!(r.out.contains("condition 2 failed: scc(X) = {X, W}"), "{}", r.out);

    let r = run(&[
        "check-cde", "--graph", &p(graph_path("fig1a")), "--treatment", "X", "--lag", "1", "--outcome", "Y",
        "--assume-no-hidden-confounding",
    ]);
    assert_eq!(r.code, EXIT_NOT_IDENTIFIABLE);
    assert!(r.out.contains("witness cycle: Y ⇄ W"), "{}", r.out);

    let r = run(&["check-cde", "--graph", &p(graph_path("fig2a")), "--treatment", "X", "--lag", "1", "--outcome", "Y"]);
    assert_eq!(r.code, EXIT_UNKNOWN);

    // The assumption contradicts a graph with bidirected edges.
    let r = run(&[
        "check-cde", "--graph", &p(graph_path("fig2a")), "--treatment", "X", "--outcome", "Y",
        "--assume-no-hidden-confounding",
    ]);
    assert_eq!(r.code, EXIT_USAGE);
}

#[test]
fn lag_defaults_to_gamma_max() {
    let with = run(&["check-nde", "--graph", &p(graph_path("fig5b")), "--treatment", "X", "--lag", "1", "--outcome", "Y"]);
    let without = run(&["check-nde", "--graph", &p(graph_path("fig5b")), "--treatment", "X", "--outcome", "Y"]);
    assert_eq!(with.code, EXIT_OK);
    assert_eq!(with.out, without.out);
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(run(&["check-cde", "--graph", "/nonexistent.json", "--treatment", "X", "--outcome", "Y"]).code, EXIT_USAGE);
    let r = run(&["check-cde", "--graph", &p(graph_path("fig5c")), "--treatment", "X", "--lag", "4", "--outcome", "Y"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(!r.err.is_empty());
    let r = run(&["check-cde", "--graph", &p(graph_path("fig1b")), "--treatment", "X", "--outcome", "Y"]);
    assert_eq!(r.code, EXIT_USAGE, "a full-time graph is not a summary graph");
    assert_eq!(run(&["--help"]).code, EXIT_OK);
}

#[test]
fn oracle_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path().join("cex.json"));
    let r = run(&["oracle", "--graph", &p(graph_path("fig3a")), "--window", "3", "--claim", "thm1", "--outcome", "Y", "--out", &out]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert!(r.out.ends_with("PASS\n"));
    assert!(!Path::new(&out).exists());

    let r = run(&["oracle", "--graph", &p(graph_path("fig1a")), "--window", "3", "--claim", "thm1", "--outcome", "Y", "--out", &out]);
    assert_eq!(r.code, EXIT_COUNTEREXAMPLE, "{}{}", r.out, r.err);
    assert!(r.out.contains("counterexample written to"));
    let Loaded::FullTime { graph, .. } = parse_graph(&std::fs::read_to_string(&out).unwrap()).unwrap() else {
        panic!("counterexample is not a full-time graph");
    };
    assert!(graph.graph().has_directed(&TemporalVertex::new("Y", 2), &TemporalVertex::new("W", 2)));
    let source = common::scg("fig1a");
    assert!(CompatibilityClass::new(&source, graph.window(), false).unwrap().contains(&graph));

    let r = run(&["oracle", "--graph", &p(graph_path("fig5c")), "--window", "3", "--claim", "thm2", "--treatment", "X", "--lag", "1", "--outcome", "Y", "--stationary"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);

    let r = run(&["oracle", "--graph", &p(graph_path("fig5b_gamma2")), "--window", "1", "--claim", "thm1", "--outcome", "Y"]);
    assert_eq!(r.code, EXIT_USAGE);

    let r = run(&[
        "oracle", "--graph", &p(graph_path("fig1a")), "--window", "3", "--claim", "thm1", "--outcome", "Y",
        "--strategy", "exhaustive", "--cap", "10", "--out", &out,
    ]);
    assert_eq!(r.code, EXIT_CAP, "{}{}", r.out, r.err);
}

#[test]
fn cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_scgid"))
        .args(["oracle", "--graph", &p(graph_path("fig3a")), "--window", "3", "--claim", "thm1", "--outcome", "Y", "--strategy", "exhaustive"])
        .env("SCGID_ENUMERATION_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CAP));
}

#[test]
fn estimate_commands() {
    let r = run(&[
        "estimate", "--model", &p(model_path("fig5c_linear")), "--graph", &p(graph_path("fig5c")), "--effect", "cde",
        "--treatment", "X", "--lag", "1", "--outcome", "Y", "--n", "100000", "--seed", "3", "--bootstrap", "100",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert!(r.out.contains("result: within 3 combined SE"));

    let r = run(&["estimate", "--model", &p(model_path("binary_mediation")), "--effect", "nde", "--treatment", "X", "--lag", "0", "--outcome", "Y"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert!(r.out.contains("true effect (exact): 83/200"), "{}", r.out);
    assert!(r.out.contains("result: exact match"));

    let r = run(&["estimate", "--model", &p(model_path("fig5c_linear")), "--graph", &p(graph_path("fig1a")), "--effect", "cde", "--treatment", "X", "--outcome", "Y"]);
    assert_eq!(r.code, EXIT_USAGE, "model/graph mismatch");
}

#[test]
fn naive_estimand_fails_on_the_reversed_orientation() {
    // Refit the Y -> W orientation to the observational law of the W -> Y
    // model: the naive adjustment formula misses its true CDE.
    let b = Model::from_json(&std::fs::read_to_string(model_path("fig1_w_causes_y")).unwrap()).unwrap();
    let template = Model::from_json(&std::fs::read_to_string(model_path("fig1_y_causes_w")).unwrap()).unwrap();
    let (mean, cov) = linear::moments(&b).unwrap();
    let c = linear::refit(template.spec(), &mean, &cov).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reversed.json");
    std::fs::write(&path, serde_json::to_string_pretty(c.spec()).unwrap()).unwrap();
    let r = run(&[
        "estimate", "--model", &p(&path), "--effect", "cde", "--treatment", "X", "--lag", "1", "--outcome", "Y",
        "--n", "100000", "--seed", "5", "--bootstrap", "50",
    ]);
    assert_eq!(r.code, EXIT_OUT_OF_TOLERANCE, "{}{}", r.out, r.err);
    assert!(r.out.contains("verdict: UNKNOWN") && r.out.contains("naive estimand:"));
}

#[test]
fn validate_round_trips_every_fixture() {
    let names = SCG_FIXTURES.iter().copied().chain(FULL_TIME_FIXTURES.iter().map(|(n, _)| *n));
    for name in names {
        let path = graph_path(name);
        let r = run(&["validate", "--graph", &p(&path)]);
        assert_eq!(r.code, EXIT_OK, "{name}: {}", r.err);
        assert_eq!(r.out, std::fs::read_to_string(&path).unwrap(), "{name}");
    }
}

#[test]
fn dot_and_sample() {
    let r = run(&["dot", "--graph", &p(graph_path("fig2a"))]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.starts_with("digraph") && r.out.contains("dir=both"));
    let r = run(&["dot", "--graph", &p(graph_path("fig2b"))]);
    assert!(r.out.contains("rank=same"));

    let r = run(&["sample", "--model", &p(model_path("binary_lagged")), "--n", "7", "--seed", "1", "--do", "X@0=1"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines.len(), 8);
    let header: Vec<&str> = lines[0].split(',').collect();
    let x0 = header.iter().position(|h| *h == "X@0").unwrap();
    assert!(lines[1..].iter().all(|l| l.split(',').nth(x0) == Some("1")));
}
