mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{arb_scg, scg, tv, FULL_TIME_FIXTURES, SCG_FIXTURES};
use scgid::io::{parse_graph, Loaded};
use scgid::oracle::OracleError;
use scgid::{Claim, CompatibilityClass, EdgeKind, FullTimeGraph, Strategy, SummaryCausalGraph, Window};

const SMALL_CAP: u64 = 20_000;

fn check_invariants(g: &FullTimeGraph, gamma_max: u32) {
    assert!(g.graph().is_acyclic());
    for e in g.edges() {
        assert!((e.to.time - e.from.time).unsigned_abs() <= gamma_max as u64, "{e:?}");
        if e.kind == EdgeKind::Directed {
            assert!(e.from.time <= e.to.time, "{e:?}");
            assert_ne!(e.from, e.to);
        }
    }
}

/// All graphs of the class, or `None` when the cap is hit.
fn all_graphs(class: &CompatibilityClass) -> Option<Vec<FullTimeGraph>> {
    match class.graphs() {
        Ok(gs) => Some(gs),
        Err(OracleError::CapExceeded(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

fn small_class(scg: &SummaryCausalGraph, extra: usize) -> CompatibilityClass {
    let w = Window::slices(scg.gamma_max() as usize + 1 + extra).unwrap();
    CompatibilityClass::new(scg, w, false).unwrap().with_cap(SMALL_CAP)
}

proptest! {
    #![proptest_config(common::proptest_config(64))]

    #[test]
    fn enumerated_graphs_project_back(g in arb_scg(1, false)) {
        let class = small_class(&g, 1);
        let graphs = all_graphs(&class);
        prop_assume!(graphs.is_some());
        let graphs = graphs.unwrap();
        prop_assert!(!graphs.is_empty());
        let mut seen = BTreeSet::new();
        for ft in &graphs {
            prop_assert!(ft.project().same_structure(&g));
            prop_assert!(class.contains(ft));
            check_invariants(ft, g.gamma_max());
            prop_assert!(seen.insert(ft.edges()), "duplicate graph");
        }
    }

    #[test]
    fn maximal_graphs_belong_to_the_class(g in arb_scg(2, false)) {
        let class = small_class(&g, 1);
        for ft in class.maximal_graphs().unwrap() {
            prop_assert!(class.contains(&ft));
            check_invariants(&ft, g.gamma_max());
        }
    }

    #[test]
    fn stationary_graphs_are_stationary(g in arb_scg(1, false)) {
        let w = Window::slices(g.gamma_max() as usize + 2).unwrap();
        let class = CompatibilityClass::new(&g, w, true).unwrap().with_cap(SMALL_CAP);
        if let Some(graphs) = all_graphs(&class) {
            for ft in graphs {
                prop_assert!(ft.is_stationary());
                prop_assert!(ft.project().same_structure(&g));
            }
        }
    }

    #[test]
    fn maximal_strategy_agrees_with_exhaustive(g in arb_scg(1, false)) {
        let class = small_class(&g, 1);
        let t = class.window().end;
        for y in g.series() {
            let claim = Claim::cde_separation(&g, y, t, class.window()).unwrap();
            let exhaustive = match class.holds_in_all(&claim, Strategy::Exhaustive) {
                Ok(o) => o,
                Err(OracleError::CapExceeded(_)) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let maximal = class.holds_in_all(&claim, Strategy::Maximal).unwrap();
            prop_assert_eq!(exhaustive.holds(), maximal.holds());
            if let Some(cex) = maximal.counterexample() {
                prop_assert!(class.contains(cex));
                prop_assert!(claim.violation(cex).unwrap().is_some());
            }
        }
    }

    #[test]
    fn possible_parents_match_enumeration(g in arb_scg(1, false)) {
        let class = small_class(&g, 1);
        let t = class.window().end;
        for y in g.series() {
            let closed = g.possible_parents_in(y, t, class.window()).unwrap();
            match class.pp_by_enumeration(y, t, Strategy::Exhaustive) {
                Ok(e) => prop_assert_eq!(&closed, &e),
                Err(OracleError::CapExceeded(_)) => {}
                Err(e) => panic!("{e}"),
            }
            prop_assert_eq!(&closed, &class.pp_by_enumeration(y, t, Strategy::Maximal).unwrap());
        }
    }

    #[test]
    fn possible_parents_shape(g in arb_scg(3, false), t in 0i64..20) {
        for y in g.series() {
            let pp = g.possible_parents(y, t).unwrap();
            prop_assert!(!pp.contains(&tv(y, t)));
            let others = g.parents(y).unwrap().iter().filter(|p| *p != y).count();
            let gm = g.gamma_max() as usize;
            prop_assert!(pp.len() <= (gm + 1) * others + gm);
            for v in &pp {
                prop_assert!(v.time <= t && t - v.time <= gm as i64);
            }
        }
    }

    #[test]
    fn template_projects_back_iff_class_is_non_empty(g in arb_scg(2, false), extra in 0usize..2) {
        let w = Window::slices(g.gamma_max() as usize + 1 + extra).unwrap();
        let ft = g.unroll_template(w).unwrap();
        check_invariants(&ft, g.gamma_max());
        let class = CompatibilityClass::new(&g, w, false).unwrap().with_cap(SMALL_CAP);
        match class.for_each(|_| Ok(std::ops::ControlFlow::Break(()))) {
            Ok(found) => prop_assert_eq!(ft.project().same_structure(&g), found > 0),
            Err(OracleError::CapExceeded(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn fixture_templates_project_to_source() {
    for name in SCG_FIXTURES {
        let g = scg(name);
        for extra in 1..=2 {
            let w = Window::slices(g.gamma_max() as usize + extra).unwrap();
            assert!(g.unroll_template(w).unwrap().project().same_structure(&g), "{name}");
        }
    }
}

#[test]
fn full_time_fixtures_are_compatible() {
    for (ft_name, scg_name) in FULL_TIME_FIXTURES {
        let Loaded::FullTime { graph, gamma_max } = parse_graph(&common::read_graph(ft_name)).unwrap() else {
            panic!("{ft_name} is not a full-time graph");
        };
        let source = scg(scg_name);
        assert_eq!(gamma_max, source.gamma_max());
        assert!(graph.project().same_structure(&source), "{ft_name}");
        check_invariants(&graph, gamma_max);
        let class = CompatibilityClass::new(&source, graph.window(), false).unwrap();
        assert!(class.contains(&graph), "{ft_name}");
        // The reference full-time fixtures are time-invariant.
        let stationary = CompatibilityClass::new(&source, graph.window(), true).unwrap();
        assert!(stationary.contains(&graph), "{ft_name}");
    }
}

#[test]
fn fig1_orientations_decide_the_separation() {
    let window = Window::slices(3).unwrap();
    let claim = Claim::cde_separation(&scg("fig1a"), "Y", 2, window).unwrap();
    for (name, holds) in [("fig1b", true), ("fig1c", false)] {
        let Loaded::FullTime { graph, .. } = parse_graph(&common::read_graph(name)).unwrap() else {
            unreachable!()
        };
        assert_eq!(claim.violation(&graph).unwrap().is_none(), holds, "{name}");
    }
}

#[test]
fn refutation_survives_a_larger_window() {
    // Refuted at the smaller window implies refuted at the larger one.
    for name in SCG_FIXTURES {
        let g = scg(name);
        let gm = g.gamma_max() as usize;
        let t = g.gamma_max() as i64;
        let outcome = |slices: usize| {
            let w = Window::slices(slices).unwrap();
            let class = CompatibilityClass::new(&g, w, false).unwrap();
            class
                .holds_in_all(&Claim::cde_separation(&g, "Y", t, w).unwrap(), Strategy::Auto)
                .unwrap()
                .holds()
        };
        let (small, large) = (outcome(gm + 1), outcome(gm + 2));
        assert!(small || !large, "{name}");
    }
}

#[test]
fn single_edge_class_counts() {
    let mut g = SummaryCausalGraph::new(1);
    g.add_series("X").unwrap();
    g.add_series("Y").unwrap();
    g.add_directed("X", "Y").unwrap();
    let w = Window::slices(2).unwrap();
    assert_eq!(CompatibilityClass::new(&g, w, false).unwrap().count().unwrap(), 7);
    assert_eq!(CompatibilityClass::new(&g, w, true).unwrap().count().unwrap(), 3);
    let class = CompatibilityClass::new(&g, w, false).unwrap();
    assert_eq!(
        class.pp_by_enumeration("Y", 1, Strategy::Exhaustive).unwrap(),
        BTreeSet::from([tv("X", 1), tv("X", 0)])
    );
}
