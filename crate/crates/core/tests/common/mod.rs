#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use scgid::io::parse_summary;
use scgid::simulation::Model;
use scgid::{SummaryCausalGraph, TemporalVertex};

pub const SCG_FIXTURES: [&str; 8] = [
    "fig1a", "fig2a", "fig3a", "fig4a", "fig5a", "fig5b", "fig5c", "fig5b_gamma2",
];

pub const FULL_TIME_FIXTURES: [(&str, &str); 6] = [
    ("fig1b", "fig1a"),
    ("fig1c", "fig1a"),
    ("fig2b", "fig2a"),
    ("fig3b", "fig3a"),
    ("fig3c", "fig3a"),
    ("fig4b", "fig4a"),
];

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn graph_path(name: &str) -> PathBuf {
    fixtures().join("graphs").join(format!("{name}.json"))
}

pub fn model_path(name: &str) -> PathBuf {
    fixtures().join("models").join(format!("{name}.json"))
}

pub fn read_graph(name: &str) -> String {
    fs::read_to_string(graph_path(name)).unwrap()
}

pub fn scg(name: &str) -> SummaryCausalGraph {
    parse_summary(&read_graph(name)).unwrap().0
}

pub fn model(name: &str) -> Model {
    Model::from_json(&fs::read_to_string(model_path(name)).unwrap()).unwrap()
}

pub fn tv(s: &str, t: i64) -> TemporalVertex {
    TemporalVertex::new(s, t)
}

/// Proptest settings without on-disk regression files.
pub fn proptest_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: None,
        ..Default::default()
    }
}

/// Random SCGs over `X, Y[, W]` with `gamma_max <= max_gamma`. With
/// `query_ready`, `X -> Y` is always present so `X_{t-g}` is a possible
/// parent of `Y_t` for every lag.
pub fn arb_scg(max_gamma: u32, query_ready: bool) -> impl proptest::strategy::Strategy<Value = SummaryCausalGraph> {
    use proptest::prelude::*;
    (2..=3usize, 0..=max_gamma).prop_flat_map(move |(k, gm)| {
        (
            proptest::collection::vec(proptest::bool::weighted(0.35), k * k),
            proptest::collection::vec(proptest::bool::weighted(0.15), k * (k + 1) / 2),
        )
            .prop_map(move |(dir, bi)| {
                let names = ["X", "Y", "W"];
                let mut g = SummaryCausalGraph::new(gm);
                for s in &names[..k] {
                    g.add_series(s).unwrap();
                }
                for (i, &on) in dir.iter().enumerate() {
                    let (a, b) = (names[i / k], names[i % k]);
                    if a == b && gm == 0 {
                        continue;
                    }
                    if on || (query_ready && a == "X" && b == "Y") {
                        g.add_directed(a, b).unwrap();
                    }
                }
                let mut idx = 0;
                for i in 0..k {
                    for j in i..k {
                        if bi[idx] && (i != j || gm > 0) {
                            g.add_bidirected(names[i], names[j]).unwrap();
                        }
                        idx += 1;
                    }
                }
                g
            })
    })
}
