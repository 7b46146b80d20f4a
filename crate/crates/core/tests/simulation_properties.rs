mod common;

use std::collections::BTreeMap;

use num_rational::BigRational;
use proptest::prelude::*;

use common::{model, proptest_config, scg, tv};
use scgid::simulation::evaluate::{bootstrap_se, evaluate_estimand, Estimator};
use scgid::simulation::{exact, linear, Dataset};
use scgid::{check_cde, EffectQuery, IdentifyOptions};

fn within(a: f64, b: f64, se: f64) -> bool {
    (a - b).abs() <= 3.0 * se
}

#[test]
fn models_realize_their_graphs() {
    let m = model("fig5c_linear");
    let g = m.summary_graph().unwrap();
    assert!(g.same_structure(&scg("fig5c")));
    // The shared noise group is the only source of bidirected edges.
    assert!(g.has_bidirected("W", "Z"));
    assert_eq!(g.graph().bidirected_edges().count(), 1);
    assert!(model("fig1_w_causes_y").summary_graph().unwrap().same_structure(&scg("fig1a")));

    let d = model("binary_mediation").summary_graph().unwrap();
    assert!(d.has_directed("X", "W") && d.has_directed("W", "Y") && d.has_directed("X", "Y"));
    assert_eq!(d.graph().edge_count(), 3);
}

#[test]
fn linear_effects_match_coefficients() {
    // Y_t = 0.8 X_{t-1} + ..., so both direct effects of X_{t-1} are 0.8.
    let m = model("fig5c_linear");
    let q = EffectQuery::new("X", 1, "Y", 2);
    let cde = m.true_cde(&q, &BTreeMap::new(), 50_000, 3).unwrap();
    assert!(within(cde.estimate, 0.8, cde.se), "{cde:?}");
    let nde = m.true_nde(&q, 1_000, 3).unwrap();
    assert!((nde.estimate - 0.8).abs() < 1e-12 && nde.se < 1e-12, "{nde:?}");

    // do() on every parent: the mean is the structural equation itself.
    let y = tv("Y", 2);
    let parents = m.full_time_graph().unwrap().parents(&y).unwrap();
    let assign: BTreeMap<_, _> = parents.iter().map(|p| (p.clone(), 1.0)).collect();
    let mc = m.interventional_mean(&y, &assign, 50_000, 4, 0).unwrap();
    let expected = 0.8 + 0.5 + 0.7 + 0.4 + 0.3 + 0.2;
    assert!(within(mc.estimate, expected, mc.se), "{mc:?}");
}

#[test]
fn observational_moments_match_sample() {
    let m = model("fig5c_linear");
    let (mean, cov) = linear::moments(&m).unwrap();
    let data = m.sample(100_000, &BTreeMap::new(), 8).unwrap();
    let n = data.len() as f64;
    for (i, v) in m.vertices().iter().enumerate() {
        let col = data.column(v).unwrap();
        let mu = col.iter().sum::<f64>() / n;
        let se = (cov[(i, i)] / n).sqrt();
        assert!(within(mu, mean[i], se), "{v}: {mu} vs {}", mean[i]);
    }
    let (w, z) = (m.index_of(&tv("W", 2)).unwrap(), m.index_of(&tv("Z", 2)).unwrap());
    let cw = data.column(&tv("W", 2)).unwrap();
    let cz = data.column(&tv("Z", 2)).unwrap();
    let (mw, mz) = (cw.iter().sum::<f64>() / n, cz.iter().sum::<f64>() / n);
    let c = cw.iter().zip(&cz).map(|(a, b)| (a - mw) * (b - mz)).sum::<f64>() / (n - 1.0);
    assert!((c - cov[(w, z)]).abs() < 0.03, "{c} vs {}", cov[(w, z)]);
}

#[test]
fn discrete_sampler_matches_exact_law() {
    let m = model("binary_lagged");
    let y = tv("Y", 1);
    for assign in [
        BTreeMap::new(),
        BTreeMap::from([(tv("X", 0), 1.0)]),
        BTreeMap::from([(tv("W", 1), 0.0), (tv("X", 0), 1.0)]),
    ] {
        let truth = exact::to_f64(&exact::interventional_mean(&m, &y, &assign).unwrap());
        let mc = m.interventional_mean(&y, &assign, 40_000, 6, 0).unwrap();
        assert!(within(mc.estimate, truth, mc.se), "{assign:?}: {mc:?} vs {truth}");
    }
}

#[test]
fn exact_mediation_by_hand() {
    // NDE = sum_w [P(Y=1|1,w) - P(Y=1|0,w)] P(w|X=0) from the fixture tables.
    let spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(common::model_path("binary_mediation")).unwrap()).unwrap();
    let table = |s: &str| -> Vec<Vec<f64>> { serde_json::from_value(spec["equations"][s]["table"].clone()).unwrap() };
    let (w, y) = (table("W"), table("Y"));
    let py = |x: usize, w: usize| y[x * 2 + w][1];
    let hand: f64 = (0..2).map(|k| (py(1, k) - py(0, k)) * w[0][k]).sum();
    let m = model("binary_mediation");
    let q = EffectQuery::new("X", 0, "Y", 0);
    let nde = exact::nde(&m, &q).unwrap();
    assert_eq!(nde, BigRational::new(83.into(), 200.into()));
    assert!((exact::to_f64(&nde) - hand).abs() < 1e-12);
    let cde = exact::cde(&m, &q, &BTreeMap::from([(tv("W", 0), 1.0)])).unwrap();
    assert!((exact::to_f64(&cde) - (py(1, 1) - py(0, 1))).abs() < 1e-12);
    // Monte-Carlo pairing agrees with the exact value.
    let mc = m.true_nde(&q, 40_000, 2).unwrap();
    assert!(within(mc.estimate, hand, mc.se), "{mc:?}");
}

#[test]
fn plug_in_converges_on_identifiable_model() {
    let m = model("fig5c_linear");
    let g = m.summary_graph().unwrap();
    let q = EffectQuery::new("X", 1, "Y", 2);
    let opts = IdentifyOptions {
        assume_no_hidden_confounding: false,
        window: Some(m.window()),
    };
    let e = check_cde(&g, &q, &opts).unwrap().estimand.unwrap();
    let free = BTreeMap::new();
    let truth = m.true_cde(&q, &free, 100_000, 1).unwrap();
    let mut last_se = f64::INFINITY;
    for (k, n) in [1_000usize, 10_000, 100_000].into_iter().enumerate() {
        let data = m.sample(n, &BTreeMap::new(), 10 + k as u64).unwrap();
        let v = evaluate_estimand(&e, &data, &free, Estimator::LeastSquares).unwrap();
        let se = bootstrap_se(&e, &data, &free, Estimator::LeastSquares, 100, 20 + k as u64).unwrap();
        let cse = (se * se + truth.se * truth.se).sqrt();
        assert!(within(v, truth.estimate, cse), "n = {n}: {v} vs {truth:?} (se {se})");
        assert!(se < last_se, "standard error does not shrink at n = {n}");
        last_se = se;
    }
}

#[test]
fn csv_roundtrip_is_lossless() {
    let m = model("fig5c_linear");
    let data = m.sample(200, &BTreeMap::new(), 17).unwrap();
    let mut buf = Vec::new();
    data.write_csv(&mut buf).unwrap();
    let back = Dataset::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, data);
}

proptest! {
    #![proptest_config(proptest_config(32))]

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), n in 1usize..200) {
        for name in ["fig5c_linear", "binary_lagged"] {
            let m = model(name);
            let a = m.sample(n, &BTreeMap::new(), seed).unwrap();
            let b = m.sample(n, &BTreeMap::new(), seed).unwrap();
            prop_assert_eq!(&a, &b);
            // Row i depends only on (seed, i): a longer sample extends a shorter one.
            let longer = m.sample(n + 5, &BTreeMap::new(), seed).unwrap();
            prop_assert_eq!(&longer.rows[..n], &a.rows[..]);
        }
    }

    #[test]
    fn interventions_pin_values(seed in any::<u64>(), v in -3.0f64..3.0) {
        let m = model("fig5c_linear");
        let data = m.sample(20, &BTreeMap::from([(tv("W", 1), v)]), seed).unwrap();
        prop_assert!(data.column(&tv("W", 1)).unwrap().iter().all(|&x| x == v));
    }

    #[test]
    fn tabular_values_are_categories(seed in any::<u64>()) {
        let m = model("binary_lagged");
        let data = m.sample(100, &BTreeMap::new(), seed).unwrap();
        prop_assert!(data.rows.iter().flatten().all(|&x| x == 0.0 || x == 1.0));
    }
}
