//! Brute-force ground truth over the full-time graphs compatible with an SCG.
//!
//! Two strategies. `Exhaustive` walks every compatible graph in canonical
//! order (units sorted, subsets by increasing size, lexicographic within a
//! size) and returns the first violation. `Maximal` only visits the
//! inclusion-maximal compatible graphs: every lagged and bidirected unit plus
//! a maximal acyclic orientation of the instantaneous edges. d-connection
//! only grows when edges are added, so a claim whose failure is preserved
//! under adding edges holds everywhere iff it holds on those. A failure found
//! this way is shrunk greedily before being reported.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::graph::{GraphError, MixedGraph};
use crate::identification::{self, EffectQuery, IdentifyError, Rule};
use crate::temporal::{
    EdgeKind, FullTimeGraph, SeriesEdge, SummaryCausalGraph, TemporalEdge, TemporalError,
    TemporalVertex, Window,
};

pub const DEFAULT_CAP: u64 = 10_000_000;
pub const CAP_ENV: &str = "SCGID_ENUMERATION_CAP";
const MAX_CANDIDATES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error("enumeration cap of {0} candidates exceeded")]
    CapExceeded(u64),
    #[error("invalid claim: {0}")]
    InvalidClaim(String),
}

/// The cap from `SCGID_ENUMERATION_CAP`, or the default.
pub fn default_cap() -> u64 {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    Exhaustive,
    Maximal,
    /// `Maximal` for claims whose failure survives adding edges,
    /// `Exhaustive` otherwise.
    #[default]
    Auto,
}

/// A d-separation statement to check in every compatible graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Claim {
    /// `a ⟂ b | given` in `G` with arrowheads into `overline` and tails out
    /// of `underline` removed.
    Separated {
        a: Vec<TemporalVertex>,
        b: Vec<TemporalVertex>,
        given: Vec<TemporalVertex>,
        overline: Vec<TemporalVertex>,
        underline: Vec<TemporalVertex>,
    },
    /// Some `S ⊆ candidates` makes `rule` applicable to
    /// `P(y | do(z), do(x), S)`.
    Separable {
        rule: Rule,
        y: Vec<TemporalVertex>,
        x: Vec<TemporalVertex>,
        z: Vec<TemporalVertex>,
        candidates: Vec<TemporalVertex>,
    },
}

impl Claim {
    /// `y_t ⟂ PP(y_t)` with the tails out of `PP(y_t)` removed.
    pub fn cde_separation(
        scg: &SummaryCausalGraph,
        y: &str,
        t: i64,
        window: Window,
    ) -> Result<Self, OracleError> {
        let pp: Vec<_> = scg.possible_parents_in(y, t, window)?.into_iter().collect();
        Ok(Claim::Separated {
            a: vec![TemporalVertex::new(y, t)],
            b: pp.clone(),
            given: Vec::new(),
            overline: Vec::new(),
            underline: pp,
        })
    }

    /// The two separations behind the NDE formula, with `Z = PP(y_t) \
    /// {x_{t-lag}}` and `A = PP(x_{t-lag})`:
    /// `x ⟂ Z | A` without tails out of `x`, and `A ⟂ x` without arrowheads
    /// into `x`.
    pub fn nde_separations(
        scg: &SummaryCausalGraph,
        q: &EffectQuery,
        window: Window,
    ) -> Result<(Self, Self), OracleError> {
        let x = q.treatment_vertex();
        let mut z = scg.possible_parents_in(&q.outcome, q.time, window)?;
        z.remove(&x);
        let a: Vec<_> = scg
            .possible_parents_in(&q.treatment, x.time, window)?
            .into_iter()
            .collect();
        let first = Claim::Separated {
            a: vec![x.clone()],
            b: z.into_iter().collect(),
            given: a.clone(),
            overline: Vec::new(),
            underline: vec![x.clone()],
        };
        let second = Claim::Separated {
            a,
            b: vec![x.clone()],
            given: Vec::new(),
            overline: vec![x],
            underline: Vec::new(),
        };
        Ok((first, second))
    }

    /// Whether a violation in `g` persists in every supergraph of `g`.
    pub fn failure_is_upward_closed(&self) -> bool {
        !matches!(self, Claim::Separable { rule: Rule::R3, .. })
    }

    pub fn vertices(&self) -> BTreeSet<TemporalVertex> {
        let sets: Vec<&Vec<TemporalVertex>> = match self {
            Claim::Separated {
                a,
                b,
                given,
                overline,
                underline,
            } => vec![a, b, given, overline, underline],
            Claim::Separable {
                y,
                x,
                z,
                candidates,
                ..
            } => vec![y, x, z, candidates],
        };
        sets.into_iter().flatten().cloned().collect()
    }

    /// `None` when the claim holds in `g`, otherwise a description of why it
    /// fails.
    pub fn violation(&self, g: &FullTimeGraph) -> Result<Option<String>, OracleError> {
        match self {
            Claim::Separated {
                a,
                b,
                given,
                overline,
                underline,
            } => {
                if a.is_empty() || b.is_empty() {
                    return Ok(None);
                }
                let m = g.graph().mutilate(overline, underline)?;
                if m.d_separated(a, b, given)? {
                    return Ok(None);
                }
                let path = m
                    .find_active_path(a, b, given)?
                    .map(|p| p.to_string())
                    .unwrap_or_else(|| "active path".to_string());
                Ok(Some(format!("active path {path}")))
            }
            Claim::Separable {
                rule,
                y,
                x,
                z,
                candidates,
            } => {
                if candidates.len() > MAX_CANDIDATES {
                    return Err(OracleError::InvalidClaim(format!(
                        "{} candidate conditioning vertices, at most {MAX_CANDIDATES} supported",
                        candidates.len()
                    )));
                }
                for mask in 0u64..(1 << candidates.len()) {
                    let s: Vec<TemporalVertex> = candidates
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, v)| v.clone())
                        .collect();
                    if identification::rule_applicable(g, *rule, y, x, z, &s)? {
                        return Ok(None);
                    }
                }
                Ok(Some(format!(
                    "{rule:?} fails for all {} conditioning subsets",
                    1u64 << candidates.len()
                )))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Holds {
        checked: u64,
        strategy: Strategy,
    },
    Counterexample {
        graph: FullTimeGraph,
        witness: String,
        checked: u64,
        strategy: Strategy,
    },
}

impl Outcome {
    pub fn holds(&self) -> bool {
        matches!(self, Outcome::Holds { .. })
    }

    pub fn counterexample(&self) -> Option<&FullTimeGraph> {
        match self {
            Outcome::Counterexample { graph, .. } => Some(graph),
            Outcome::Holds { .. } => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Maximal => "maximal",
            Strategy::Auto => "auto",
        })
    }
}

/// One enumeration choice: an edge (non-stationary) or a time-invariant
/// pattern (stationary) with all its in-window instances.
#[derive(Debug, Clone)]
struct Unit {
    edges: Vec<TemporalEdge>,
    series_edge: usize,
    /// Instantaneous directed instances as vertex index pairs.
    instant: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct Universe {
    units: Vec<Unit>,
    series_edges: Vec<SeriesEdge>,
    /// Last unit index realizing each series edge.
    last: Vec<usize>,
    vertex_count: usize,
}

/// Instantaneous directed edges with undo, for incremental cycle checks.
struct InstantGraph {
    children: Vec<Vec<usize>>,
}

impl InstantGraph {
    fn new(n: usize) -> Self {
        Self {
            children: vec![Vec::new(); n],
        }
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; self.children.len()];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for &w in &self.children[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Adds all pairs or none; false if that would close a cycle.
    fn try_add(&mut self, pairs: &[(usize, usize)]) -> bool {
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if self.reaches(b, a) {
                self.remove(&pairs[..k]);
                return false;
            }
            self.children[a].push(b);
        }
        true
    }

    fn remove(&mut self, pairs: &[(usize, usize)]) {
        for &(a, b) in pairs.iter().rev() {
            let pos = self.children[a]
                .iter()
                .rposition(|&w| w == b)
                .expect("edge present");
            self.children[a].remove(pos);
        }
    }
}

/// Every full-time graph over a window whose projection is the SCG.
#[derive(Debug, Clone)]
pub struct CompatibilityClass {
    scg: SummaryCausalGraph,
    window: Window,
    stationary: bool,
    cap: u64,
    universe: Universe,
}

impl CompatibilityClass {
    pub fn new(
        scg: &SummaryCausalGraph,
        window: Window,
        stationary: bool,
    ) -> Result<Self, OracleError> {
        scg.check_window(window)?;
        let universe = Self::build_universe(scg, window, stationary)?;
        Ok(Self {
            scg: scg.clone(),
            window,
            stationary,
            cap: default_cap(),
            universe,
        })
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn scg(&self) -> &SummaryCausalGraph {
        &self.scg
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Number of enumeration units (edges, or patterns when stationary).
    pub fn unit_count(&self) -> usize {
        self.universe.units.len()
    }

    fn build_universe(
        scg: &SummaryCausalGraph,
        window: Window,
        stationary: bool,
    ) -> Result<Universe, OracleError> {
        let series_edges: Vec<SeriesEdge> = scg.edge_set().into_iter().collect();
        let edge_id: HashMap<&SeriesEdge, usize> =
            series_edges.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut vertex_index = HashMap::new();
        for t in window.times() {
            for s in scg.series() {
                let n = vertex_index.len();
                vertex_index.insert(TemporalVertex::new(s.clone(), t), n);
            }
        }
        let make_unit = |edges: Vec<TemporalEdge>, se: SeriesEdge| -> Unit {
            let instant = edges
                .iter()
                .filter(|e| e.is_instantaneous_directed())
                .map(|e| (vertex_index[&e.from], vertex_index[&e.to]))
                .collect();
            Unit {
                edges,
                series_edge: edge_id[&se],
                instant,
            }
        };
        let units: Vec<Unit> = if stationary {
            scg.licensed_patterns()
                .into_iter()
                .map(|p| make_unit(p.instantiate(window), p.series_edge()))
                .collect()
        } else {
            scg.licensed_edges(window)?
                .into_iter()
                .map(|e| {
                    let se = e.series_edge();
                    make_unit(vec![e], se)
                })
                .collect()
        };
        let mut last = vec![0; series_edges.len()];
        for (i, u) in units.iter().enumerate() {
            last[u.series_edge] = i;
        }
        Ok(Universe {
            units,
            series_edges,
            last,
            vertex_count: vertex_index.len(),
        })
    }

    fn build(&self, chosen: &[usize]) -> Result<FullTimeGraph, OracleError> {
        let mut edges: Vec<&TemporalEdge> = chosen
            .iter()
            .flat_map(|&i| &self.universe.units[i].edges)
            .collect();
        edges.sort();
        Ok(FullTimeGraph::from_edges(
            self.scg.series(),
            self.window,
            edges,
        )?)
    }

    fn realizes_all(&self, chosen: &[usize]) -> bool {
        let mut seen = vec![false; self.universe.series_edges.len()];
        for &i in chosen {
            seen[self.universe.units[i].series_edge] = true;
        }
        seen.into_iter().all(|s| s)
    }

    /// Whether `g` belongs to the class: same series and window, every edge
    /// licensed, every SCG edge realized, and time-invariant when stationary.
    pub fn contains(&self, g: &FullTimeGraph) -> bool {
        if g.window() != self.window {
            return false;
        }
        let mine: BTreeSet<&String> = self.scg.series().iter().collect();
        let theirs: BTreeSet<&String> = g.series().iter().collect();
        if mine != theirs {
            return false;
        }
        let licensed: BTreeSet<TemporalEdge> = match self.scg.licensed_edges(self.window) {
            Ok(e) => e.into_iter().collect(),
            Err(_) => return false,
        };
        g.edges().iter().all(|e| licensed.contains(e))
            && g.project().same_structure(&self.scg)
            && (!self.stationary || g.is_stationary())
    }

    /// Streams every compatible graph in canonical order. Returns how many
    /// graphs were produced.
    pub fn for_each<F>(&self, mut f: F) -> Result<u64, OracleError>
    where
        F: FnMut(&FullTimeGraph) -> Result<ControlFlow<()>, OracleError>,
    {
        let n = self.universe.units.len();
        let mut search = Search {
            class: self,
            instant: InstantGraph::new(self.universe.vertex_count),
            realized: vec![0; self.universe.series_edges.len()],
            chosen: Vec::new(),
            visited: 0,
            produced: 0,
        };
        let min_k = self.universe.series_edges.len();
        for k in min_k..=n {
            if search.dfs(0, k, &mut f)?.is_break() {
                break;
            }
        }
        Ok(search.produced)
    }

    pub fn graphs(&self) -> Result<Vec<FullTimeGraph>, OracleError> {
        let mut out = Vec::new();
        self.for_each(|g| {
            out.push(g.clone());
            Ok(ControlFlow::Continue(()))
        })?;
        Ok(out)
    }

    pub fn count(&self) -> Result<u64, OracleError> {
        self.for_each(|_| Ok(ControlFlow::Continue(())))
    }

    /// Unit sets of the inclusion-maximal compatible graphs.
    fn maximal_unit_sets(&self) -> Result<Vec<Vec<usize>>, OracleError> {
        let units = &self.universe.units;
        let (instant, fixed): (Vec<usize>, Vec<usize>) =
            (0..units.len()).partition(|&i| !units[i].instant.is_empty());
        let orientations = maximal_orientations(&self.scg)?;
        // Instantaneous units grouped by the slice they live in; a stationary
        // pattern spans every slice at once.
        let slices: Vec<Option<i64>> = if self.stationary {
            vec![None]
        } else {
            self.window.times().map(Some).collect()
        };
        let unit_of: HashMap<(Option<i64>, usize), Vec<usize>> = {
            let mut m: HashMap<(Option<i64>, usize), Vec<usize>> = HashMap::new();
            for &i in &instant {
                let slice = if self.stationary {
                    None
                } else {
                    Some(units[i].edges[0].to.time)
                };
                m.entry((slice, units[i].series_edge)).or_default().push(i);
            }
            m
        };
        let total = (orientations.len() as u64)
            .checked_pow(slices.len() as u32)
            .unwrap_or(u64::MAX);
        if total > self.cap {
            return Err(OracleError::CapExceeded(self.cap));
        }
        let series_ids: HashMap<&SeriesEdge, usize> = self
            .universe
            .series_edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        let mut out = Vec::new();
        let mut choice = vec![0usize; slices.len()];
        loop {
            let mut set = fixed.clone();
            for (s, &c) in slices.iter().zip(&choice) {
                for e in &orientations[c] {
                    if let Some(us) = unit_of.get(&(*s, series_ids[e])) {
                        set.extend(us);
                    }
                }
            }
            set.sort_unstable();
            if self.realizes_all(&set) {
                out.push(set);
            }
            // odometer over per-slice choices
            let mut k = 0;
            loop {
                if k == choice.len() {
                    return Ok(out);
                }
                choice[k] += 1;
                if choice[k] < orientations.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }

    /// The inclusion-maximal compatible graphs.
    pub fn maximal_graphs(&self) -> Result<Vec<FullTimeGraph>, OracleError> {
        self.maximal_unit_sets()?
            .iter()
            .map(|s| self.build(s))
            .collect()
    }

    fn resolve(&self, claim: &Claim, strategy: Strategy) -> Result<Strategy, OracleError> {
        Ok(match strategy {
            Strategy::Auto if claim.failure_is_upward_closed() => Strategy::Maximal,
            Strategy::Auto => Strategy::Exhaustive,
            Strategy::Maximal if !claim.failure_is_upward_closed() => {
                return Err(OracleError::InvalidClaim(
                    "rule 3 claims need exhaustive enumeration".into(),
                ))
            }
            s => s,
        })
    }

    fn check_claim_vertices(&self, claim: &Claim) -> Result<(), OracleError> {
        for v in claim.vertices() {
            if !self.window.contains(v.time) || !self.scg.has_series(&v.series) {
                return Err(OracleError::InvalidClaim(format!(
                    "{v} is not a vertex of the window"
                )));
            }
        }
        Ok(())
    }

    /// Whether `claim` holds in every compatible graph, or a graph where it
    /// fails.
    pub fn holds_in_all(&self, claim: &Claim, strategy: Strategy) -> Result<Outcome, OracleError> {
        self.check_claim_vertices(claim)?;
        let strategy = self.resolve(claim, strategy)?;
        match strategy {
            Strategy::Exhaustive => {
                let mut found = None;
                let mut checked = 0;
                self.for_each(|g| {
                    checked += 1;
                    if let Some(w) = claim.violation(g)? {
                        found = Some((g.clone(), w));
                        return Ok(ControlFlow::Break(()));
                    }
                    Ok(ControlFlow::Continue(()))
                })?;
                Ok(match found {
                    Some((graph, witness)) => Outcome::Counterexample {
                        graph,
                        witness,
                        checked,
                        strategy,
                    },
                    None => Outcome::Holds { checked, strategy },
                })
            }
            _ => {
                let sets = self.maximal_unit_sets()?;
                let mut checked = 0;
                for set in sets {
                    checked += 1;
                    let g = self.build(&set)?;
                    if claim.violation(&g)?.is_some() {
                        let (graph, witness) = self.shrink(claim, set)?;
                        return Ok(Outcome::Counterexample {
                            graph,
                            witness,
                            checked,
                            strategy,
                        });
                    }
                }
                Ok(Outcome::Holds { checked, strategy })
            }
        }
    }

    /// Drop units from the back of the canonical order while the graph stays
    /// compatible and the claim still fails.
    fn shrink(
        &self,
        claim: &Claim,
        mut set: Vec<usize>,
    ) -> Result<(FullTimeGraph, String), OracleError> {
        let mut k = set.len();
        while k > 0 {
            k -= 1;
            let mut trial = set.clone();
            trial.remove(k);
            if self.realizes_all(&trial) && claim.violation(&self.build(&trial)?)?.is_some() {
                set = trial;
            }
        }
        let g = self.build(&set)?;
        let witness = claim
            .violation(&g)?
            .expect("shrinking keeps the violation");
        Ok((g, witness))
    }

    /// Union of the parents of `y_t` over the class.
    pub fn pp_by_enumeration(
        &self,
        y: &str,
        t: i64,
        strategy: Strategy,
    ) -> Result<BTreeSet<TemporalVertex>, OracleError> {
        let v = TemporalVertex::new(y, t);
        self.check_claim_vertices(&Claim::Separated {
            a: vec![v.clone()],
            b: vec![],
            given: vec![],
            overline: vec![],
            underline: vec![],
        })?;
        let mut out = BTreeSet::new();
        match strategy {
            Strategy::Exhaustive => {
                self.for_each(|g| {
                    out.extend(g.parents(&v)?);
                    Ok(ControlFlow::Continue(()))
                })?;
            }
            // Parent sets only grow with edges.
            _ => {
                for g in self.maximal_graphs()? {
                    out.extend(g.parents(&v)?);
                }
            }
        }
        Ok(out)
    }
}

struct Search<'a> {
    class: &'a CompatibilityClass,
    instant: InstantGraph,
    realized: Vec<u32>,
    chosen: Vec<usize>,
    visited: u64,
    produced: u64,
}

impl Search<'_> {
    fn dfs<F>(&mut self, start: usize, picks: usize, f: &mut F) -> Result<ControlFlow<()>, OracleError>
    where
        F: FnMut(&FullTimeGraph) -> Result<ControlFlow<()>, OracleError>,
    {
        self.visited += 1;
        if self.visited > self.class.cap {
            return Err(OracleError::CapExceeded(self.class.cap));
        }
        let u = &self.class.universe;
        let missing: Vec<usize> = (0..self.realized.len())
            .filter(|&e| self.realized[e] == 0)
            .collect();
        if picks == 0 {
            if missing.is_empty() {
                self.produced += 1;
                let g = self.class.build(&self.chosen)?;
                return f(&g);
            }
            return Ok(ControlFlow::Continue(()));
        }
        if missing.len() > picks {
            return Ok(ControlFlow::Continue(()));
        }
        // Every missing series edge must still be realizable at or after `i`.
        let deadline = missing.iter().map(|&e| u.last[e]).min().unwrap_or(usize::MAX);
        for i in start..u.units.len() {
            if u.units.len() - i < picks || i > deadline {
                break;
            }
            let unit = &u.units[i];
            if !self.instant.try_add(&unit.instant) {
                continue;
            }
            self.realized[unit.series_edge] += 1;
            self.chosen.push(i);
            let flow = self.dfs(i + 1, picks - 1, f);
            self.chosen.pop();
            self.realized[unit.series_edge] -= 1;
            self.instant.remove(&unit.instant);
            if flow?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

/// The inclusion-maximal acyclic subsets of the SCG's non-loop directed
/// edges, read as instantaneous edges. Each is the set of edges agreeing
/// with some vertex order; only orders inside each strongly connected
/// component matter.
fn maximal_orientations(scg: &SummaryCausalGraph) -> Result<Vec<BTreeSet<SeriesEdge>>, OracleError> {
    let mut d: MixedGraph<String> = MixedGraph::new(false);
    for s in scg.series() {
        d.add_vertex(s.clone())?;
    }
    let edges: Vec<(String, String)> = scg
        .graph()
        .directed_edges()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| (a.clone(), b.clone()))
        .collect();
    for (a, b) in &edges {
        d.add_directed(a, b)?;
    }
    let comps = d.components_idx();
    let comp_of: HashMap<String, usize> = comps
        .iter()
        .enumerate()
        .flat_map(|(c, vs)| vs.iter().map(move |&v| (v, c)))
        .map(|(v, c)| (d.vertex(v).clone(), c))
        .collect();
    let mut base = BTreeSet::new();
    let mut per_comp: BTreeMap<usize, Vec<(String, String)>> = BTreeMap::new();
    for (a, b) in &edges {
        if comp_of[a] == comp_of[b] {
            per_comp.entry(comp_of[a]).or_default().push((a.clone(), b.clone()));
        } else {
            base.insert(SeriesEdge::directed(a, b));
        }
    }
    let mut result = vec![base];
    for (c, inner) in per_comp {
        let members: Vec<String> = comps[c].iter().map(|&v| d.vertex(v).clone()).collect();
        if members.len() > 8 {
            return Err(OracleError::InvalidClaim(format!(
                "strongly connected component of {} series is too large to orient",
                members.len()
            )));
        }
        let mut options: BTreeSet<BTreeSet<SeriesEdge>> = BTreeSet::new();
        for perm in permutations(members.len()) {
            let rank: HashMap<&String, usize> =
                perm.iter().enumerate().map(|(r, &m)| (&members[m], r)).collect();
            options.insert(
                inner
                    .iter()
                    .filter(|(a, b)| rank[a] < rank[b])
                    .map(|(a, b)| SeriesEdge::directed(a, b))
                    .collect(),
            );
        }
        let maximal: Vec<&BTreeSet<SeriesEdge>> = options
            .iter()
            .filter(|o| !options.iter().any(|p| p != *o && o.is_subset(p)))
            .collect();
        result = result
            .iter()
            .flat_map(|r| {
                maximal
                    .iter()
                    .map(move |m| r.iter().chain(m.iter()).cloned().collect())
            })
            .collect();
    }
    Ok(result)
}

/// All permutations of `0..n` (Heap's algorithm).
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// The edge kinds present, for reporting.
pub fn describe(g: &FullTimeGraph) -> String {
    let (d, b) = g
        .edges()
        .iter()
        .fold((0, 0), |(d, b), e| match e.kind {
            EdgeKind::Directed => (d + 1, b),
            EdgeKind::Bidirected => (d, b + 1),
        });
    format!("{d} directed and {b} bidirected edges")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> SummaryCausalGraph {
        SummaryCausalGraph::from_edges(&[], &[("X", "Y")], &[], 1).unwrap()
    }

    #[test]
    fn single_edge_counts() {
        let w = Window::slices(2).unwrap();
        assert_eq!(CompatibilityClass::new(&xy(), w, false).unwrap().count().unwrap(), 7);
        assert_eq!(CompatibilityClass::new(&xy(), w, true).unwrap().count().unwrap(), 3);
    }

    #[test]
    fn lone_vertex_has_one_graph() {
        let scg = SummaryCausalGraph::from_edges(&["Y"], &[], &[], 0).unwrap();
        let cc = CompatibilityClass::new(&scg, Window::slices(2).unwrap(), false).unwrap();
        let gs = cc.graphs().unwrap();
        assert_eq!(gs.len(), 1);
        assert!(gs[0].edges().is_empty());
    }

    #[test]
    fn canonical_order_by_size() {
        let cc = CompatibilityClass::new(&xy(), Window::slices(2).unwrap(), false).unwrap();
        let sizes: Vec<usize> = cc.graphs().unwrap().iter().map(|g| g.edges().len()).collect();
        assert_eq!(sizes, vec![1, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn two_cycle_orientations() {
        let scg = SummaryCausalGraph::from_edges(&[], &[("X", "Y"), ("Y", "X")], &[], 0).unwrap();
        let o = maximal_orientations(&scg).unwrap();
        assert_eq!(o.len(), 2);
        // gamma_max 0 over two slices: each slice picks one orientation and
        // both directions must appear somewhere.
        let cc = CompatibilityClass::new(&scg, Window::slices(2).unwrap(), false).unwrap();
        assert_eq!(cc.maximal_graphs().unwrap().len(), 2);
        assert_eq!(cc.count().unwrap(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let cc = CompatibilityClass::new(&xy(), Window::slices(2).unwrap(), false)
            .unwrap()
            .with_cap(3);
        assert_eq!(cc.count(), Err(OracleError::CapExceeded(3)));
    }

    #[test]
    fn pp_for_self_loop() {
        let scg = SummaryCausalGraph::from_edges(&[], &[("X", "Y"), ("Y", "Y")], &[], 1).unwrap();
        let cc = CompatibilityClass::new(&scg, Window::slices(2).unwrap(), false).unwrap();
        let want: BTreeSet<_> = [
            TemporalVertex::new("X", 1),
            TemporalVertex::new("X", 0),
            TemporalVertex::new("Y", 0),
        ]
        .into_iter()
        .collect();
        for s in [Strategy::Exhaustive, Strategy::Maximal] {
            assert_eq!(cc.pp_by_enumeration("Y", 1, s).unwrap(), want);
        }
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(0).len(), 1);
    }
}
