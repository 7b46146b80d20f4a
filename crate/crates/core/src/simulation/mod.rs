//! Synthetic structural models over a window of time slices: sampling,
//! interventions, counterfactuals and ground-truth direct effects.
//!
//! Two families. Linear-Gaussian equations, with optional shared Gaussian
//! components for hidden confounding, and tabular equations over small
//! categorical ranges driven by one uniform draw per variable. Parents whose
//! time falls before the window start take the value 0.

pub mod evaluate;
pub mod exact;
pub mod linear;

use std::collections::{BTreeMap, HashMap};
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::identification::EffectQuery;
use crate::temporal::{FullTimeGraph, SummaryCausalGraph, TemporalError, TemporalVertex, Window};

pub use evaluate::{bootstrap_se, evaluate_estimand, Estimator, Table};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid intervention on {0}: {1}")]
    InvalidIntervention(String, String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("empty conditioning cell: {0}")]
    EmptyCell(String),
    #[error("singular design in least-squares fit of {0}")]
    Singular(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("enumeration of {0} states exceeds the limit of {1}")]
    TooLarge(u128, u128),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

type Result<T> = std::result::Result<T, SimulationError>;

/// `{series, lag}` with an optional linear coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentRef {
    pub series: String,
    pub lag: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coef: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NoiseLaw {
    Gaussian { sd: f64 },
}

impl Default for NoiseLaw {
    fn default() -> Self {
        NoiseLaw::Gaussian { sd: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Equation {
    /// `intercept + sum coef * parent + noise`.
    Linear {
        #[serde(default)]
        intercept: f64,
        parents: Vec<ParentRef>,
        #[serde(default)]
        noise: NoiseLaw,
    },
    /// `table[row][k] = P(V = k | parents)`, rows in mixed radix with the
    /// first parent most significant.
    Tabular {
        cardinality: usize,
        parents: Vec<ParentRef>,
        table: Vec<Vec<f64>>,
    },
}

/// Replaces the series equation at one time point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Override {
    pub series: String,
    pub time: i64,
    pub equation: Equation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedMember {
    pub series: String,
    #[serde(default)]
    pub lag: u32,
    #[serde(default = "one")]
    pub loading: f64,
}

fn one() -> f64 {
    1.0
}

/// One Gaussian component per reference time `τ`, added with `loading` to
/// each member `series` at `τ - lag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedNoise {
    pub id: String,
    #[serde(default = "one")]
    pub sd: f64,
    pub members: Vec<SharedMember>,
}

/// The JSON model format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub series: Vec<String>,
    pub window: [i64; 2],
    pub gamma_max: u32,
    pub equations: BTreeMap<String, Equation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<Override>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shared_noise: Vec<SharedNoise>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Linear,
    Tabular,
}

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Linear {
        intercept: f64,
        /// `(vertex, coef)`; out-of-window parents dropped.
        terms: Vec<(usize, f64)>,
        sd: f64,
    },
    Tabular {
        card: usize,
        /// `(vertex or None when before the window, cardinality)`.
        parents: Vec<(Option<usize>, usize)>,
        table: Vec<Vec<f64>>,
        cumulative: Vec<Vec<f64>>,
    },
}

impl Node {
    fn parent_indices(&self) -> Vec<usize> {
        match self {
            Node::Linear { terms, .. } => terms.iter().map(|t| t.0).collect(),
            Node::Tabular { parents, .. } => parents.iter().filter_map(|p| p.0).collect(),
        }
    }

    fn row(parents: &[(Option<usize>, usize)], values: &[f64]) -> usize {
        parents.iter().fold(0, |acc, &(p, card)| {
            acc * card + p.map_or(0, |i| values[i] as usize)
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct GroupInstance {
    pub sd: f64,
    pub members: Vec<(usize, f64)>,
}

/// A validated model with a topological evaluation order.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    window: Window,
    family: Family,
    vertices: Vec<TemporalVertex>,
    index: HashMap<TemporalVertex, usize>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) order: Vec<usize>,
    pub(crate) groups: Vec<GroupInstance>,
    /// Shared components touching each vertex: `(group, loading)`.
    shared_of: Vec<Vec<(usize, f64)>>,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SimulationError::InvalidModel(msg.into()))
}

impl Model {
    pub fn from_json(s: &str) -> Result<Self> {
        Self::new(serde_json::from_str(s)?)
    }

    pub fn new(spec: ModelSpec) -> Result<Self> {
        let window = Window::new(spec.window[0], spec.window[1])?;
        let mut vertices = Vec::new();
        for t in window.times() {
            for s in &spec.series {
                vertices.push(TemporalVertex::new(s.clone(), t));
            }
        }
        let index: HashMap<TemporalVertex, usize> =
            vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        if index.len() != vertices.len() {
            return invalid("duplicate series");
        }
        for s in spec.equations.keys() {
            if !spec.series.contains(s) {
                return invalid(format!("equation for undeclared series {s}"));
            }
        }
        let mut overrides: HashMap<(String, i64), &Equation> = HashMap::new();
        for o in &spec.overrides {
            if !spec.series.contains(&o.series) || !window.contains(o.time) {
                return invalid(format!("override for {}@{} outside the model", o.series, o.time));
            }
            if overrides.insert((o.series.clone(), o.time), &o.equation).is_some() {
                return invalid(format!("duplicate override for {}@{}", o.series, o.time));
            }
        }
        let mut family = None;
        let mut nodes = Vec::with_capacity(vertices.len());
        for v in &vertices {
            let eq = match overrides.get(&(v.series.clone(), v.time)) {
                Some(e) => *e,
                None => match spec.equations.get(&v.series) {
                    Some(e) => e,
                    None => return invalid(format!("no equation for series {}", v.series)),
                },
            };
            let f = match eq {
                Equation::Linear { .. } => Family::Linear,
                Equation::Tabular { .. } => Family::Tabular,
            };
            if *family.get_or_insert(f) != f {
                return invalid("linear and tabular equations cannot be mixed");
            }
            nodes.push(Self::compile(&spec, &index, window, v, eq)?);
        }
        let family = family.unwrap_or(Family::Linear);
        // tabular parents must have the cardinality the child's table assumes
        for (i, n) in nodes.iter().enumerate() {
            if let Node::Tabular { parents, .. } = n {
                for &(p, card) in parents {
                    if let Some(p) = p {
                        if let Node::Tabular { card: pc, .. } = nodes[p] {
                            if pc != card {
                                return invalid(format!(
                                    "{} expects {} categories for {}, which has {pc}",
                                    vertices[i], card, vertices[p]
                                ));
                            }
                        }
                    }
                }
            }
        }
        let order = topological_order(&nodes).ok_or_else(|| {
            SimulationError::InvalidModel("instantaneous equations form a cycle".into())
        })?;

        let mut groups = Vec::new();
        let mut shared_of = vec![Vec::new(); vertices.len()];
        for g in &spec.shared_noise {
            if family == Family::Tabular {
                return invalid("shared noise requires linear equations");
            }
            if !(g.sd > 0.0) {
                return invalid(format!("shared noise {} needs a positive sd", g.id));
            }
            for m in &g.members {
                if !spec.series.contains(&m.series) || m.lag > spec.gamma_max {
                    return invalid(format!("shared noise {} has invalid member {}", g.id, m.series));
                }
            }
            for tau in window.times() {
                let members: Vec<(usize, f64)> = g
                    .members
                    .iter()
                    .filter_map(|m| {
                        index
                            .get(&TemporalVertex::new(m.series.clone(), tau - m.lag as i64))
                            .map(|&i| (i, m.loading))
                    })
                    .collect();
                if members.is_empty() {
                    continue;
                }
                for &(i, l) in &members {
                    shared_of[i].push((groups.len(), l));
                }
                groups.push(GroupInstance { sd: g.sd, members });
            }
        }
        Ok(Self {
            spec,
            window,
            family,
            vertices,
            index,
            nodes,
            order,
            groups,
            shared_of,
        })
    }

    fn compile(
        spec: &ModelSpec,
        index: &HashMap<TemporalVertex, usize>,
        window: Window,
        v: &TemporalVertex,
        eq: &Equation,
    ) -> Result<Node> {
        let resolve = |p: &ParentRef| -> Result<Option<usize>> {
            if !spec.series.contains(&p.series) {
                return invalid(format!("{v} refers to unknown series {}", p.series));
            }
            if p.lag > spec.gamma_max {
                return invalid(format!("{v}: lag {} exceeds gamma_max", p.lag));
            }
            if p.lag == 0 && p.series == v.series {
                return invalid(format!("{v} cannot depend on itself"));
            }
            let t = v.time - p.lag as i64;
            Ok(if window.contains(t) {
                Some(index[&TemporalVertex::new(p.series.clone(), t)])
            } else {
                None
            })
        };
        match eq {
            Equation::Linear {
                intercept,
                parents,
                noise,
            } => {
                let mut terms = Vec::new();
                for p in parents {
                    let coef = p.coef.ok_or_else(|| {
                        SimulationError::InvalidModel(format!("{v}: linear parent {} needs coef", p.series))
                    })?;
                    if let Some(i) = resolve(p)? {
                        terms.push((i, coef));
                    }
                }
                let NoiseLaw::Gaussian { sd } = *noise;
                if !(sd > 0.0) {
                    return invalid(format!("{v}: noise sd must be positive"));
                }
                Ok(Node::Linear {
                    intercept: *intercept,
                    terms,
                    sd,
                })
            }
            Equation::Tabular {
                cardinality,
                parents,
                table,
            } => {
                if *cardinality < 2 {
                    return invalid(format!("{v}: cardinality must be at least 2"));
                }
                let mut resolved = Vec::new();
                for p in parents {
                    let card = match spec.equations.get(&p.series) {
                        Some(Equation::Tabular { cardinality, .. }) => *cardinality,
                        _ => return invalid(format!("{v}: parent {} is not tabular", p.series)),
                    };
                    resolved.push((resolve(p)?, card));
                }
                let rows: usize = resolved.iter().map(|p| p.1).product();
                if table.len() != rows {
                    return invalid(format!("{v}: table has {} rows, expected {rows}", table.len()));
                }
                let mut cumulative = Vec::with_capacity(rows);
                for row in table {
                    if row.len() != *cardinality {
                        return invalid(format!("{v}: table row of length {}", row.len()));
                    }
                    if row.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
                        return invalid(format!("{v}: probabilities must lie strictly inside (0, 1)"));
                    }
                    if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                        return invalid(format!("{v}: table row does not sum to 1"));
                    }
                    let mut acc = 0.0;
                    let mut cum: Vec<f64> = row
                        .iter()
                        .map(|p| {
                            acc += p;
                            acc
                        })
                        .collect();
                    *cum.last_mut().expect("non-empty row") = 1.0;
                    cumulative.push(cum);
                }
                Ok(Node::Tabular {
                    card: *cardinality,
                    parents: resolved,
                    table: table.clone(),
                    cumulative,
                })
            }
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn gamma_max(&self) -> u32 {
        self.spec.gamma_max
    }

    pub fn vertices(&self) -> &[TemporalVertex] {
        &self.vertices
    }

    pub fn index_of(&self, v: &TemporalVertex) -> Result<usize> {
        self.index
            .get(v)
            .copied()
            .ok_or_else(|| SimulationError::UnknownVariable(v.to_string()))
    }

    /// Number of categories of a tabular vertex.
    pub fn cardinality(&self, v: usize) -> Option<usize> {
        match &self.nodes[v] {
            Node::Tabular { card, .. } => Some(*card),
            Node::Linear { .. } => None,
        }
    }

    /// Directed edges from the equations, bidirected edges between members
    /// of each shared component.
    pub fn full_time_graph(&self) -> Result<FullTimeGraph> {
        let mut g = FullTimeGraph::new(self.spec.series.iter().cloned(), self.window)?;
        for (i, n) in self.nodes.iter().enumerate() {
            for p in n.parent_indices() {
                g.add_directed(&self.vertices[p], &self.vertices[i])?;
            }
        }
        for grp in &self.groups {
            for (k, &(a, _)) in grp.members.iter().enumerate() {
                for &(b, _) in &grp.members[k + 1..] {
                    let (va, vb) = (&self.vertices[a], &self.vertices[b]);
                    if a != b && !g.graph().has_bidirected(va, vb) {
                        g.add_bidirected(va, vb)?;
                    }
                }
            }
        }
        Ok(g)
    }

    /// The SCG the model realizes, with the model's `gamma_max`.
    pub fn summary_graph(&self) -> Result<SummaryCausalGraph> {
        let p = self.full_time_graph()?.project();
        let mut scg = SummaryCausalGraph::new(self.spec.gamma_max);
        for s in p.series() {
            scg.add_series(s)?;
        }
        for (a, b) in p.graph().directed_edges() {
            scg.add_directed(a, b)?;
        }
        for (a, b) in p.graph().bidirected_edges() {
            scg.add_bidirected(a, b)?;
        }
        Ok(scg)
    }

    /// Check a do-assignment and turn it into a per-vertex override vector.
    pub fn interventions(&self, assignments: &BTreeMap<TemporalVertex, f64>) -> Result<Vec<Option<f64>>> {
        let mut out = vec![None; self.vertices.len()];
        for (v, &x) in assignments {
            let i = self
                .index
                .get(v)
                .copied()
                .ok_or_else(|| SimulationError::InvalidIntervention(v.to_string(), "not in the model".into()))?;
            if let Some(card) = self.cardinality(i) {
                if x.fract() != 0.0 || x < 0.0 || x >= card as f64 {
                    return Err(SimulationError::InvalidIntervention(
                        v.to_string(),
                        format!("value {x} is not a category in 0..{card}"),
                    ));
                }
            }
            if !x.is_finite() {
                return Err(SimulationError::InvalidIntervention(v.to_string(), "non-finite value".into()));
            }
            out[i] = Some(x);
        }
        Ok(out)
    }

    /// Independent exogenous draws for replicate `stream` of `seed`.
    pub(crate) fn draw(&self, seed: u64, stream: u64) -> Exogenous {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let own = match self.family {
            Family::Linear => (0..self.vertices.len())
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
            Family::Tabular => (0..self.vertices.len()).map(|_| rng.random::<f64>()).collect(),
        };
        let shared = (0..self.groups.len())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Exogenous { own, shared }
    }

    /// Solve the equations for one exogenous draw, with `fixed` overriding
    /// the equations of intervened vertices.
    pub(crate) fn solve(&self, exo: &Exogenous, fixed: &[Option<f64>]) -> Vec<f64> {
        let mut values = vec![0.0; self.vertices.len()];
        for &i in &self.order {
            values[i] = match fixed[i] {
                Some(x) => x,
                None => match &self.nodes[i] {
                    Node::Linear {
                        intercept,
                        terms,
                        sd,
                    } => {
                        let mut y = intercept + sd * exo.own[i];
                        for &(p, c) in terms {
                            y += c * values[p];
                        }
                        for &(g, l) in &self.shared_of[i] {
                            y += l * self.groups[g].sd * exo.shared[g];
                        }
                        y
                    }
                    Node::Tabular {
                        parents,
                        cumulative,
                        card,
                        ..
                    } => {
                        let cum = &cumulative[Node::row(parents, &values)];
                        let u = exo.own[i];
                        cum.iter().position(|&c| u < c).unwrap_or(card - 1) as f64
                    }
                },
            };
        }
        values
    }

    /// Ancestral sampling of `n` rows. Row `i` uses replicate stream `i`.
    pub fn sample(
        &self,
        n: usize,
        assignments: &BTreeMap<TemporalVertex, f64>,
        seed: u64,
    ) -> Result<Dataset> {
        let fixed = self.interventions(assignments)?;
        let rows = (0..n as u64)
            .map(|i| self.solve(&self.draw(seed, i), &fixed))
            .collect();
        Ok(Dataset {
            columns: self.vertices.clone(),
            rows,
            provenance: if assignments.is_empty() {
                Provenance::Observational
            } else {
                Provenance::Interventional(assignments.clone())
            },
        })
    }

    /// Monte-Carlo `E[target | do(assignments)]` over streams
    /// `offset..offset + n`.
    pub fn interventional_mean(
        &self,
        target: &TemporalVertex,
        assignments: &BTreeMap<TemporalVertex, f64>,
        n: usize,
        seed: u64,
        offset: u64,
    ) -> Result<MonteCarlo> {
        let t = self.index_of(target)?;
        let fixed = self.interventions(assignments)?;
        let values: Vec<f64> = (0..n as u64)
            .map(|i| self.solve(&self.draw(seed, offset + i), &fixed)[t])
            .collect();
        Ok(MonteCarlo::from_samples(&values))
    }

    /// `Z = PP(Y_t) \ {X_{t-lag}}` inside the model window, in display order.
    pub fn mediator_set(&self, q: &EffectQuery) -> Result<Vec<TemporalVertex>> {
        let scg = self.summary_graph()?;
        let mut z = scg.possible_parents_in(&q.outcome, q.time, self.window)?;
        z.remove(&q.treatment_vertex());
        Ok(crate::identification::display_order(z))
    }

    fn cde_assignments(
        &self,
        q: &EffectQuery,
        z: &BTreeMap<TemporalVertex, f64>,
        x: f64,
    ) -> Result<BTreeMap<TemporalVertex, f64>> {
        let mediators = self.mediator_set(q)?;
        for v in z.keys() {
            if !mediators.contains(v) {
                return Err(SimulationError::InvalidIntervention(
                    v.to_string(),
                    "not a possible parent of the outcome".into(),
                ));
            }
        }
        let mut a: BTreeMap<TemporalVertex, f64> = mediators
            .into_iter()
            .map(|v| {
                let val = z.get(&v).copied().unwrap_or(0.0);
                (v, val)
            })
            .collect();
        a.insert(q.treatment_vertex(), x);
        Ok(a)
    }

    /// `E[Y | do(X = x'), do(Z = z)] - E[Y | do(X = x), do(Z = z)]` from two
    /// independent arms of `n` replicates. Unspecified members of `Z` are
    /// held at 0.
    pub fn true_cde(
        &self,
        q: &EffectQuery,
        z: &BTreeMap<TemporalVertex, f64>,
        n: usize,
        seed: u64,
    ) -> Result<MonteCarlo> {
        let y = q.outcome_vertex();
        let hi = self.interventional_mean(&y, &self.cde_assignments(q, z, q.x_prime)?, n, seed, 0)?;
        let lo = self.interventional_mean(&y, &self.cde_assignments(q, z, q.x)?, n, seed, n as u64)?;
        Ok(MonteCarlo {
            estimate: hi.estimate - lo.estimate,
            se: (hi.se.powi(2) + lo.se.powi(2)).sqrt(),
            n,
        })
    }

    /// Per replicate: `Z` under `do(X = x)`, then `Y` under
    /// `do(X = x', Z = z_x)` minus `Y` under `do(X = x)`, all from the same
    /// exogenous draw.
    pub fn true_nde(&self, q: &EffectQuery, n: usize, seed: u64) -> Result<MonteCarlo> {
        let y = self.index_of(&q.outcome_vertex())?;
        let x = self.index_of(&q.treatment_vertex())?;
        let mediators: Vec<usize> = self
            .mediator_set(q)?
            .iter()
            .map(|v| self.index_of(v))
            .collect::<Result<_>>()?;
        let base = self.interventions(&BTreeMap::from([(q.treatment_vertex(), q.x)]))?;
        self.interventions(&BTreeMap::from([(q.treatment_vertex(), q.x_prime)]))?;
        let diffs: Vec<f64> = (0..n as u64)
            .map(|i| {
                let exo = self.draw(seed, i);
                let world_x = self.solve(&exo, &base);
                let mut cross = base.clone();
                cross[x] = Some(q.x_prime);
                for &m in &mediators {
                    cross[m] = Some(world_x[m]);
                }
                self.solve(&exo, &cross)[y] - world_x[y]
            })
            .collect();
        Ok(MonteCarlo::from_samples(&diffs))
    }
}

/// Exogenous draws for one replicate: one per vertex (standard normal or
/// uniform) plus one standard normal per shared component.
#[derive(Debug, Clone)]
pub(crate) struct Exogenous {
    pub own: Vec<f64>,
    pub shared: Vec<f64>,
}

fn topological_order(nodes: &[Node]) -> Option<Vec<usize>> {
    let n = nodes.len();
    let mut indegree = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    for (i, node) in nodes.iter().enumerate() {
        for p in node.parent_indices() {
            indegree[i] += 1;
            children[p].push(i);
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub estimate: f64,
    pub se: f64,
    pub n: usize,
}

impl MonteCarlo {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                estimate: f64::NAN,
                se: f64::NAN,
                n,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            estimate: mean,
            se: (var / n as f64).sqrt(),
            n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Observational,
    Interventional(BTreeMap<TemporalVertex, f64>),
}

/// Rows of values for every vertex of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<TemporalVertex>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, v: &TemporalVertex) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == v)
            .ok_or_else(|| SimulationError::UnknownVariable(v.to_string()))
    }

    pub fn column(&self, v: &TemporalVertex) -> Result<Vec<f64>> {
        let i = self.column_index(v)?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV with `series@time` headers.
    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.columns.iter().map(|c| c.to_string()))?;
        for r in &self.rows {
            out.write_record(r.iter().map(|x| x.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`Dataset::write_csv`]; provenance is taken to
    /// be observational.
    pub fn read_csv<R: io::Read>(r: R) -> Result<Self> {
        let mut input = csv::Reader::from_reader(r);
        let columns = input
            .headers()?
            .iter()
            .map(|h| {
                TemporalVertex::parse(h).ok_or_else(|| {
                    SimulationError::InvalidModel(format!("column `{h}` is not series@time"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for rec in input.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| SimulationError::InvalidModel(format!("bad value `{x}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self {
            columns,
            rows,
            provenance: Provenance::Observational,
        })
    }
}
