//! Python bindings for `scgid`.
//!
//! Temporal vertices cross the boundary as `"name@time"` strings.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use scgid::io::{full_time_to_dot, parse_summary, summary_to_dot, GraphFile};
use scgid::oracle::OracleError;
use scgid::simulation::exact;
use scgid::{
    check_cde, check_nde, Claim, CompatibilityClass, EffectQuery, Identification, IdentifyOptions,
    Outcome, Strategy, TemporalVertex, Window,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_vertex(s: &str) -> PyResult<TemporalVertex> {
    TemporalVertex::parse(s).ok_or_else(|| PyValueError::new_err(format!("not a temporal vertex: {s:?}")))
}

fn parse_assignments(values: Option<BTreeMap<String, f64>>) -> PyResult<BTreeMap<TemporalVertex, f64>> {
    values
        .unwrap_or_default()
        .into_iter()
        .map(|(k, v)| Ok((parse_vertex(&k)?, v)))
        .collect()
}

fn parse_strategy(name: &str) -> PyResult<Strategy> {
    match name {
        "auto" => Ok(Strategy::Auto),
        "maximal" => Ok(Strategy::Maximal),
        "exhaustive" => Ok(Strategy::Exhaustive),
        _ => Err(PyValueError::new_err(format!("unknown strategy: {name}"))),
    }
}

// =============================================================================
// Summary causal graph
// =============================================================================

/// A summary causal graph with its maximal lag.
#[pyclass(name = "SummaryGraph", module = "scgid")]
struct PySummaryGraph {
    scg: scgid::SummaryCausalGraph,
    window: Option<Window>,
}

#[pymethods]
impl PySummaryGraph {
    /// Load from the JSON graph format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (scg, window) = parse_summary(text).map_err(value_err)?;
        Ok(Self { scg, window })
    }

    /// Build from edge lists of `(from, to)` and `(a, b)` pairs.
    #[new]
    #[pyo3(signature = (gamma_max, series, directed, bidirected=Vec::new()))]
    fn new(
        gamma_max: u32,
        series: Vec<String>,
        directed: Vec<(String, String)>,
        bidirected: Vec<(String, String)>,
    ) -> PyResult<Self> {
        let mut scg = scgid::SummaryCausalGraph::new(gamma_max);
        for s in &series {
            scg.add_series(s).map_err(value_err)?;
        }
        for (a, b) in &directed {
            scg.add_directed(a, b).map_err(value_err)?;
        }
        for (a, b) in &bidirected {
            scg.add_bidirected(a, b).map_err(value_err)?;
        }
        Ok(Self { scg, window: None })
    }

    #[getter]
    fn gamma_max(&self) -> u32 {
        self.scg.gamma_max()
    }

    #[getter]
    fn series(&self) -> Vec<String> {
        self.scg.series().to_vec()
    }

    fn to_json(&self) -> String {
        GraphFile::from_summary(&self.scg, self.window).to_json()
    }

    fn to_dot(&self) -> String {
        summary_to_dot(&self.scg)
    }

    fn scc(&self, series: &str) -> PyResult<Vec<String>> {
        Ok(self.scg.scc(series).map_err(value_err)?.into_iter().collect())
    }

    /// Possible parents of `series` at time `t`, as `"name@time"` strings.
    fn possible_parents(&self, series: &str, t: i64) -> PyResult<Vec<String>> {
        let pp = self.scg.possible_parents(series, t).map_err(value_err)?;
        Ok(pp.iter().map(ToString::to_string).collect())
    }

    /// Decide identifiability of the controlled direct effect.
    #[pyo3(signature = (treatment, outcome, lag=None, assume_no_hidden_confounding=false))]
    fn check_cde(
        &self,
        treatment: &str,
        outcome: &str,
        lag: Option<u32>,
        assume_no_hidden_confounding: bool,
    ) -> PyResult<PyIdentification> {
        let (q, opts) = self.query(treatment, outcome, lag, assume_no_hidden_confounding);
        check_cde(&self.scg, &q, &opts).map(PyIdentification::from).map_err(value_err)
    }

    /// Decide identifiability of the natural direct effect.
    #[pyo3(signature = (treatment, outcome, lag=None))]
    fn check_nde(&self, treatment: &str, outcome: &str, lag: Option<u32>) -> PyResult<PyIdentification> {
        let (q, opts) = self.query(treatment, outcome, lag, false);
        check_nde(&self.scg, &q, &opts).map(PyIdentification::from).map_err(value_err)
    }

    /// Check the outcome's separation from its possible parents in every
    /// compatible full-time graph over `window` slices.
    #[pyo3(signature = (outcome, window, stationary=false, strategy="auto", cap=None))]
    fn oracle_cde(
        &self,
        outcome: &str,
        window: usize,
        stationary: bool,
        strategy: &str,
        cap: Option<u64>,
    ) -> PyResult<PyOracleResult> {
        let w = Window::slices(window).map_err(value_err)?;
        let claim = Claim::cde_separation(&self.scg, outcome, w.end, w).map_err(value_err)?;
        self.run_oracle(&[claim], w, stationary, strategy, cap)
    }

    /// Check both separations behind the natural direct effect formula.
    #[pyo3(signature = (treatment, outcome, window, lag=None, stationary=false, strategy="auto", cap=None))]
    #[allow(clippy::too_many_arguments)]
    fn oracle_nde(
        &self,
        treatment: &str,
        outcome: &str,
        window: usize,
        lag: Option<u32>,
        stationary: bool,
        strategy: &str,
        cap: Option<u64>,
    ) -> PyResult<PyOracleResult> {
        let w = Window::slices(window).map_err(value_err)?;
        let q = EffectQuery::new(treatment, lag.unwrap_or(self.scg.gamma_max()), outcome, w.end);
        let (first, second) = Claim::nde_separations(&self.scg, &q, w).map_err(value_err)?;
        self.run_oracle(&[first, second], w, stationary, strategy, cap)
    }

    fn __repr__(&self) -> String {
        format!(
            "SummaryGraph(gamma_max={}, series={:?}, edges={})",
            self.scg.gamma_max(),
            self.scg.series(),
            self.scg.graph().edge_count()
        )
    }
}

impl PySummaryGraph {
    fn query(&self, treatment: &str, outcome: &str, lag: Option<u32>, assume: bool) -> (EffectQuery, IdentifyOptions) {
        let gm = self.scg.gamma_max();
        let q = EffectQuery::new(treatment, lag.unwrap_or(gm), outcome, 2 * gm as i64);
        let opts = IdentifyOptions {
            assume_no_hidden_confounding: assume,
            window: None,
        };
        (q, opts)
    }

    fn run_oracle(
        &self,
        claims: &[Claim],
        window: Window,
        stationary: bool,
        strategy: &str,
        cap: Option<u64>,
    ) -> PyResult<PyOracleResult> {
        let strategy = parse_strategy(strategy)?;
        let mut class = CompatibilityClass::new(&self.scg, window, stationary).map_err(value_err)?;
        if let Some(cap) = cap {
            class = class.with_cap(cap);
        }
        let mut checked = 0;
        for claim in claims {
            match class.holds_in_all(claim, strategy) {
                Ok(Outcome::Holds { checked: n, .. }) => checked += n,
                Ok(Outcome::Counterexample { graph, witness, checked: n, .. }) => {
                    return Ok(PyOracleResult {
                        holds: false,
                        checked: checked + n,
                        witness: Some(witness),
                        counterexample: Some(GraphFile::from_full_time(&graph, self.scg.gamma_max()).to_json()),
                        counterexample_dot: Some(full_time_to_dot(&graph)),
                    });
                }
                Err(e @ OracleError::CapExceeded(_)) => return Err(PyRuntimeError::new_err(e.to_string())),
                Err(e) => return Err(value_err(e)),
            }
        }
        Ok(PyOracleResult {
            holds: true,
            checked,
            witness: None,
            counterexample: None,
            counterexample_dot: None,
        })
    }
}

// =============================================================================
// Results
// =============================================================================

/// Verdict, checked conditions and adjustment estimand.
#[pyclass(name = "Identification", module = "scgid", get_all)]
struct PyIdentification {
    /// `IDENTIFIABLE`, `NOT_IDENTIFIABLE_BY_ADJUSTMENT` or `UNKNOWN`.
    status: String,
    effect: String,
    /// `(index, holds, detail)` per condition.
    conditions: Vec<(usize, bool, String)>,
    cycle: Option<Vec<String>>,
    estimand: Option<String>,
}

impl From<Identification> for PyIdentification {
    fn from(r: Identification) -> Self {
        Self {
            status: r.verdict.status.as_str().to_string(),
            effect: r.verdict.effect.to_string(),
            conditions: r
                .verdict
                .conditions
                .iter()
                .map(|c| (c.index, c.holds, c.detail.clone()))
                .collect(),
            cycle: r.verdict.cycle,
            estimand: r.estimand.map(|e| e.to_string()),
        }
    }
}

#[pymethods]
impl PyIdentification {
    #[getter]
    fn identifiable(&self) -> bool {
        self.status == "IDENTIFIABLE"
    }

    fn __repr__(&self) -> String {
        format!("Identification({}, {})", self.effect, self.status)
    }
}

/// Outcome of an oracle run. The counterexample is JSON in the graph format.
#[pyclass(name = "OracleResult", module = "scgid", get_all)]
struct PyOracleResult {
    holds: bool,
    checked: u64,
    witness: Option<String>,
    counterexample: Option<String>,
    counterexample_dot: Option<String>,
}

#[pymethods]
impl PyOracleResult {
    fn __repr__(&self) -> String {
        format!("OracleResult(holds={}, checked={})", self.holds, self.checked)
    }
}

// =============================================================================
// Structural models
// =============================================================================

/// A linear-Gaussian or tabular structural model over a finite window.
#[pyclass(name = "Model", module = "scgid")]
struct PyModel {
    model: scgid::Model,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        scgid::Model::from_json(text).map(|model| Self { model }).map_err(value_err)
    }

    /// Column names in sampling order.
    #[getter]
    fn columns(&self) -> Vec<String> {
        self.model.vertices().iter().map(ToString::to_string).collect()
    }

    /// The summary graph the model realizes.
    fn summary_graph(&self) -> PyResult<PySummaryGraph> {
        let scg = self.model.summary_graph().map_err(value_err)?;
        Ok(PySummaryGraph {
            scg,
            window: Some(self.model.window()),
        })
    }

    /// `n` rows as lists of floats, optionally under `do(...)`.
    #[pyo3(signature = (n, seed=0, interventions=None))]
    fn sample(&self, n: usize, seed: u64, interventions: Option<BTreeMap<String, f64>>) -> PyResult<Vec<Vec<f64>>> {
        let assign = parse_assignments(interventions)?;
        Ok(self.model.sample(n, &assign, seed).map_err(value_err)?.rows)
    }

    /// Monte-Carlo controlled direct effect as `(estimate, se)`.
    #[pyo3(signature = (treatment, lag, outcome, time, n=100_000, seed=1, mediators=None))]
    #[allow(clippy::too_many_arguments)]
    fn true_cde(
        &self,
        treatment: &str,
        lag: u32,
        outcome: &str,
        time: i64,
        n: usize,
        seed: u64,
        mediators: Option<BTreeMap<String, f64>>,
    ) -> PyResult<(f64, f64)> {
        let q = EffectQuery::new(treatment, lag, outcome, time);
        let z = parse_assignments(mediators)?;
        let mc = self.model.true_cde(&q, &z, n, seed).map_err(value_err)?;
        Ok((mc.estimate, mc.se))
    }

    /// Monte-Carlo natural direct effect as `(estimate, se)`.
    #[pyo3(signature = (treatment, lag, outcome, time, n=100_000, seed=1))]
    fn true_nde(&self, treatment: &str, lag: u32, outcome: &str, time: i64, n: usize, seed: u64) -> PyResult<(f64, f64)> {
        let q = EffectQuery::new(treatment, lag, outcome, time);
        let mc = self.model.true_nde(&q, n, seed).map_err(value_err)?;
        Ok((mc.estimate, mc.se))
    }

    /// Exact natural direct effect of a tabular model, as a fraction string.
    fn exact_nde(&self, treatment: &str, lag: u32, outcome: &str, time: i64) -> PyResult<String> {
        let q = EffectQuery::new(treatment, lag, outcome, time);
        exact::nde(&self.model, &q).map(|r| r.to_string()).map_err(value_err)
    }
}

#[pymodule]
#[pyo3(name = "scgid")]
fn scgid_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySummaryGraph>()?;
    m.add_class::<PyIdentification>()?;
    m.add_class::<PyOracleResult>()?;
    m.add_class::<PyModel>()?;
    Ok(())
}
