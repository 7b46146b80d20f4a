//! Summary causal graphs and the full-time graphs over a finite window of
//! time slices that they abstract.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{GraphError, MixedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemporalError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("unknown series `{0}`")]
    UnknownSeries(String),
    #[error("window [{start}, {end}] spans {} step(s), need at least gamma_max = {gamma_max}", end - start)]
    WindowTooSmall { start: i64, end: i64, gamma_max: u32 },
    #[error("invalid window [{0}, {1}]")]
    InvalidWindow(i64, i64),
    #[error("time {time} is outside the window [{start}, {end}]")]
    OutsideWindow { time: i64, start: i64, end: i64 },
    #[error("edge {from} -> {to} points backward in time")]
    BackwardEdge { from: String, to: String },
    #[error("edge {from} -> {to} closes a directed cycle")]
    Cycle { from: String, to: String },
    #[error("self-loop on `{0}` cannot be realized with gamma_max = 0")]
    UnrealizableSelfLoop(String),
}

/// A closed range of integer time indices `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn new(start: i64, end: i64) -> Result<Self, TemporalError> {
        if end < start {
            return Err(TemporalError::InvalidWindow(start, end));
        }
        Ok(Self { start, end })
    }

    /// `slices` consecutive time points starting at 0.
    pub fn slices(slices: usize) -> Result<Self, TemporalError> {
        if slices == 0 {
            return Err(TemporalError::InvalidWindow(0, -1));
        }
        Self::new(0, slices as i64 - 1)
    }

    pub fn span(&self) -> i64 {
        self.end - self.start
    }

    pub fn len(&self) -> usize {
        (self.span() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn times(&self) -> impl Iterator<Item = i64> {
        self.start..=self.end
    }

    pub fn check(&self, t: i64) -> Result<(), TemporalError> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(TemporalError::OutsideWindow {
                time: t,
                start: self.start,
                end: self.end,
            })
        }
    }
}

/// `series` observed at `time`. Displayed as `series@time`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TemporalVertex {
    pub series: String,
    pub time: i64,
}

impl TemporalVertex {
    pub fn new(series: impl Into<String>, time: i64) -> Self {
        Self {
            series: series.into(),
            time,
        }
    }

    /// Name relative to a reference time: `Y_t`, `X_{t-1}`.
    pub fn relative(&self, reference: i64) -> String {
        match self.time - reference {
            0 => format!("{}_t", self.series),
            d if d < 0 => format!("{}_{{t{}}}", self.series, d),
            d => format!("{}_{{t+{}}}", self.series, d),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (series, time) = s.rsplit_once('@')?;
        Some(Self::new(series, time.parse().ok()?))
    }
}

impl fmt::Display for TemporalVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.series, self.time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Directed,
    Bidirected,
}

/// A full-time edge. Bidirected edges are normalized so that `from < to`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TemporalEdge {
    pub kind: EdgeKind,
    pub from: TemporalVertex,
    pub to: TemporalVertex,
}

impl TemporalEdge {
    pub fn directed(from: TemporalVertex, to: TemporalVertex) -> Self {
        Self {
            kind: EdgeKind::Directed,
            from,
            to,
        }
    }

    pub fn bidirected(a: TemporalVertex, b: TemporalVertex) -> Self {
        let (from, to) = if a <= b { (a, b) } else { (b, a) };
        Self {
            kind: EdgeKind::Bidirected,
            from,
            to,
        }
    }

    /// The series-level edge this edge realizes. Bidirected series pairs are
    /// ordered by name.
    pub fn series_edge(&self) -> SeriesEdge {
        match self.kind {
            EdgeKind::Directed => SeriesEdge {
                kind: EdgeKind::Directed,
                from: self.from.series.clone(),
                to: self.to.series.clone(),
            },
            EdgeKind::Bidirected => SeriesEdge::bidirected(&self.from.series, &self.to.series),
        }
    }

    /// Lag-0 directed edges are the only ones that can close a cycle.
    pub fn is_instantaneous_directed(&self) -> bool {
        self.kind == EdgeKind::Directed && self.from.time == self.to.time
    }
}

impl fmt::Display for TemporalEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.kind {
            EdgeKind::Directed => "->",
            EdgeKind::Bidirected => "<->",
        };
        write!(f, "{} {} {}", self.from, arrow, self.to)
    }
}

/// A series-level edge; bidirected pairs normalized so that `from <= to`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeriesEdge {
    pub kind: EdgeKind,
    pub from: String,
    pub to: String,
}

impl SeriesEdge {
    pub fn directed(from: &str, to: &str) -> Self {
        Self {
            kind: EdgeKind::Directed,
            from: from.to_string(),
            to: to.to_string(),
        }
    }

    pub fn bidirected(a: &str, b: &str) -> Self {
        let (from, to) = if a <= b { (a, b) } else { (b, a) };
        Self {
            kind: EdgeKind::Bidirected,
            from: from.to_string(),
            to: to.to_string(),
        }
    }
}

/// A series-level mixed graph with a known maximal lag. Directed and
/// bidirected self-loops are allowed.
#[derive(Debug, Clone)]
pub struct SummaryCausalGraph {
    graph: MixedGraph<String>,
    gamma_max: u32,
}

impl SummaryCausalGraph {
    pub fn new(gamma_max: u32) -> Self {
        Self {
            graph: MixedGraph::new(true),
            gamma_max,
        }
    }

    /// Convenience constructor from edge lists; series are declared in the
    /// order given, then any new endpoint in edge order.
    pub fn from_edges(
        series: &[&str],
        directed: &[(&str, &str)],
        bidirected: &[(&str, &str)],
        gamma_max: u32,
    ) -> Result<Self, TemporalError> {
        let mut g = Self::new(gamma_max);
        for s in series {
            g.add_series(s)?;
        }
        for (a, b) in directed.iter().chain(bidirected) {
            for v in [a, b] {
                if !g.has_series(v) {
                    g.add_series(v)?;
                }
            }
        }
        for (a, b) in directed {
            g.add_directed(a, b)?;
        }
        for (a, b) in bidirected {
            g.add_bidirected(a, b)?;
        }
        Ok(g)
    }

    pub fn add_series(&mut self, name: &str) -> Result<(), TemporalError> {
        self.graph.add_vertex(name.to_string())?;
        Ok(())
    }

    fn check_self_loop(&self, a: &str, b: &str) -> Result<(), TemporalError> {
        if a == b && self.gamma_max == 0 {
            return Err(TemporalError::UnrealizableSelfLoop(a.to_string()));
        }
        Ok(())
    }

    /// Self-loops need a lag, so they require `gamma_max >= 1`.
    pub fn add_directed(&mut self, from: &str, to: &str) -> Result<(), TemporalError> {
        self.check_self_loop(from, to)?;
        self.graph.add_directed(&from.to_string(), &to.to_string())?;
        Ok(())
    }

    pub fn add_bidirected(&mut self, a: &str, b: &str) -> Result<(), TemporalError> {
        self.check_self_loop(a, b)?;
        self.graph.add_bidirected(&a.to_string(), &b.to_string())?;
        Ok(())
    }

    pub fn graph(&self) -> &MixedGraph<String> {
        &self.graph
    }

    pub fn gamma_max(&self) -> u32 {
        self.gamma_max
    }

    pub fn series(&self) -> &[String] {
        self.graph.vertices()
    }

    pub fn has_series(&self, name: &str) -> bool {
        self.graph.contains(&name.to_string())
    }

    fn require(&self, name: &str) -> Result<String, TemporalError> {
        if self.has_series(name) {
            Ok(name.to_string())
        } else {
            Err(TemporalError::UnknownSeries(name.to_string()))
        }
    }

    pub fn parents(&self, y: &str) -> Result<BTreeSet<String>, TemporalError> {
        Ok(self.graph.parents(&self.require(y)?)?)
    }

    pub fn ancestors(&self, y: &str) -> Result<BTreeSet<String>, TemporalError> {
        Ok(self.graph.ancestors(&self.require(y)?)?)
    }

    pub fn descendants(&self, y: &str) -> Result<BTreeSet<String>, TemporalError> {
        Ok(self.graph.descendants(&self.require(y)?)?)
    }

    pub fn scc(&self, y: &str) -> Result<BTreeSet<String>, TemporalError> {
        Ok(self.graph.scc(&self.require(y)?)?)
    }

    /// Series joined to `y` by a bidirected edge (`y` itself for `y <-> y`).
    pub fn confounded_with(&self, y: &str) -> Result<BTreeSet<String>, TemporalError> {
        Ok(self.graph.spouses(&self.require(y)?)?)
    }

    pub fn has_self_loop(&self, y: &str) -> bool {
        let y = y.to_string();
        self.graph.has_directed(&y, &y)
    }

    pub fn has_directed(&self, from: &str, to: &str) -> bool {
        self.graph.has_directed(&from.to_string(), &to.to_string())
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        self.graph.has_bidirected(&a.to_string(), &b.to_string())
    }

    /// Normalized edge set, for structural comparison.
    pub fn edge_set(&self) -> BTreeSet<SeriesEdge> {
        self.graph
            .directed_edges()
            .map(|(a, b)| SeriesEdge::directed(a, b))
            .chain(
                self.graph
                    .bidirected_edges()
                    .map(|(a, b)| SeriesEdge::bidirected(a, b)),
            )
            .collect()
    }

    /// Same series and same edges of both kinds; `gamma_max` is not compared.
    pub fn same_structure(&self, other: &Self) -> bool {
        let a: BTreeSet<_> = self.series().iter().collect();
        let b: BTreeSet<_> = other.series().iter().collect();
        a == b && self.edge_set() == other.edge_set()
    }

    /// Possible parents of `y_t` over an unbounded past:
    /// `{P_{t-g} : P in pa(y) \ {y}, g in [0, gamma_max]}` plus
    /// `{y_{t-g} : g in (0, gamma_max]}` when `y` has a self-loop.
    pub fn possible_parents(
        &self,
        y: &str,
        t: i64,
    ) -> Result<BTreeSet<TemporalVertex>, TemporalError> {
        let parents = self.parents(y)?;
        let lags = 0..=self.gamma_max as i64;
        let mut out = BTreeSet::new();
        for p in parents.iter().filter(|p| p.as_str() != y) {
            for g in lags.clone() {
                out.insert(TemporalVertex::new(p.clone(), t - g));
            }
        }
        if parents.contains(y) {
            for g in 1..=self.gamma_max as i64 {
                out.insert(TemporalVertex::new(y, t - g));
            }
        }
        Ok(out)
    }

    /// Possible parents restricted to a window: members earlier than the
    /// window start are dropped.
    pub fn possible_parents_in(
        &self,
        y: &str,
        t: i64,
        window: Window,
    ) -> Result<BTreeSet<TemporalVertex>, TemporalError> {
        window.check(t)?;
        let mut pp = self.possible_parents(y, t)?;
        pp.retain(|v| v.time >= window.start);
        Ok(pp)
    }

    pub fn check_window(&self, window: Window) -> Result<(), TemporalError> {
        if window.span() < self.gamma_max as i64 {
            return Err(TemporalError::WindowTooSmall {
                start: window.start,
                end: window.end,
                gamma_max: self.gamma_max,
            });
        }
        Ok(())
    }

    /// Every full-time edge an SCG edge licenses inside `window`, in
    /// canonical (sorted) order. Both orientations of an instantaneous edge
    /// appear when the SCG has both directions, so the result can be cyclic.
    pub fn licensed_edges(&self, window: Window) -> Result<Vec<TemporalEdge>, TemporalError> {
        self.check_window(window)?;
        let gm = self.gamma_max as i64;
        let mut out = BTreeSet::new();
        for (a, b) in self.graph.directed_edges() {
            for t in window.times() {
                for lag in 0..=gm {
                    let s = t - lag;
                    if s < window.start || (a == b && lag == 0) {
                        continue;
                    }
                    out.insert(TemporalEdge::directed(
                        TemporalVertex::new(a.clone(), s),
                        TemporalVertex::new(b.clone(), t),
                    ));
                }
            }
        }
        for (a, b) in self.graph.bidirected_edges() {
            for t in window.times() {
                for lag in -gm..=gm {
                    let s = t - lag;
                    if !window.contains(s) || (a == b && lag == 0) {
                        continue;
                    }
                    out.insert(TemporalEdge::bidirected(
                        TemporalVertex::new(a.clone(), s),
                        TemporalVertex::new(b.clone(), t),
                    ));
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// The stationary edge patterns the SCG licenses, in canonical order.
    pub fn licensed_patterns(&self) -> Vec<EdgePattern> {
        let gm = self.gamma_max;
        let mut out = BTreeSet::new();
        for (a, b) in self.graph.directed_edges() {
            let first = if a == b { 1 } else { 0 };
            for lag in first..=gm {
                out.insert(EdgePattern {
                    kind: EdgeKind::Directed,
                    from: a.clone(),
                    to: b.clone(),
                    lag,
                });
            }
        }
        for (a, b) in self.graph.bidirected_edges() {
            if a == b {
                for lag in 1..=gm {
                    out.insert(EdgePattern {
                        kind: EdgeKind::Bidirected,
                        from: a.clone(),
                        to: a.clone(),
                        lag,
                    });
                }
                continue;
            }
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            out.insert(EdgePattern {
                kind: EdgeKind::Bidirected,
                from: lo.clone(),
                to: hi.clone(),
                lag: 0,
            });
            for lag in 1..=gm {
                for (x, y) in [(lo, hi), (hi, lo)] {
                    out.insert(EdgePattern {
                        kind: EdgeKind::Bidirected,
                        from: x.clone(),
                        to: y.clone(),
                        lag,
                    });
                }
            }
        }
        out.into_iter().collect()
    }

    /// The maximally dense acyclic compatible graph: every licensed lagged
    /// and bidirected edge, plus the instantaneous edges that can be added in
    /// canonical order without closing a cycle. An instantaneous edge whose
    /// series edge is still unrealized when reached is tried first; the rest
    /// follow in a second pass.
    pub fn unroll_template(&self, window: Window) -> Result<FullTimeGraph, TemporalError> {
        let edges = self.licensed_edges(window)?;
        let mut g = FullTimeGraph::new(self.series().iter().cloned(), window)?;
        let mut realized = BTreeSet::new();
        let (instant, rest): (Vec<_>, Vec<_>) =
            edges.into_iter().partition(|e| e.is_instantaneous_directed());
        for e in rest {
            realized.insert(e.series_edge());
            g.add_edge(&e)?;
        }
        let mut rest = Vec::new();
        for e in instant {
            if realized.contains(&e.series_edge()) {
                rest.push(e);
                continue;
            }
            match g.add_edge(&e) {
                Ok(()) => {
                    realized.insert(e.series_edge());
                }
                Err(TemporalError::Cycle { .. }) => {}
                Err(err) => return Err(err),
            }
        }
        for e in rest {
            match g.add_edge(&e) {
                Ok(()) | Err(TemporalError::Cycle { .. }) => {}
                Err(err) => return Err(err),
            }
        }
        Ok(g)
    }
}

/// A time-invariant edge: `from_{t-lag} -> to_t` or `from_{t-lag} <-> to_t`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgePattern {
    pub kind: EdgeKind,
    pub from: String,
    pub to: String,
    pub lag: u32,
}

impl EdgePattern {
    /// Instances at every time where both endpoints fall in the window.
    pub fn instantiate(&self, window: Window) -> Vec<TemporalEdge> {
        window
            .times()
            .filter(|t| window.contains(t - self.lag as i64))
            .map(|t| {
                let a = TemporalVertex::new(self.from.clone(), t - self.lag as i64);
                let b = TemporalVertex::new(self.to.clone(), t);
                match self.kind {
                    EdgeKind::Directed => TemporalEdge::directed(a, b),
                    EdgeKind::Bidirected => TemporalEdge::bidirected(a, b),
                }
            })
            .collect()
    }

    pub fn series_edge(&self) -> SeriesEdge {
        match self.kind {
            EdgeKind::Directed => SeriesEdge::directed(&self.from, &self.to),
            EdgeKind::Bidirected => SeriesEdge::bidirected(&self.from, &self.to),
        }
    }
}

/// An acyclic mixed graph over `series x window`. Directed edges never point
/// backward in time and there are no self-loops of either kind.
#[derive(Debug, Clone)]
pub struct FullTimeGraph {
    window: Window,
    series: Vec<String>,
    graph: MixedGraph<TemporalVertex>,
}

impl FullTimeGraph {
    /// Edgeless graph with one vertex per series and time in the window.
    pub fn new<I: IntoIterator<Item = String>>(
        series: I,
        window: Window,
    ) -> Result<Self, TemporalError> {
        let series: Vec<String> = series.into_iter().collect();
        let mut graph = MixedGraph::new(false);
        for t in window.times() {
            for s in &series {
                graph.add_vertex(TemporalVertex::new(s.clone(), t))?;
            }
        }
        Ok(Self {
            window,
            series,
            graph,
        })
    }

    pub fn from_edges<'a, I>(
        series: &[String],
        window: Window,
        edges: I,
    ) -> Result<Self, TemporalError>
    where
        I: IntoIterator<Item = &'a TemporalEdge>,
    {
        let mut g = Self::new(series.iter().cloned(), window)?;
        for e in edges {
            g.add_edge(e)?;
        }
        Ok(g)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn series(&self) -> &[String] {
        &self.series
    }

    pub fn graph(&self) -> &MixedGraph<TemporalVertex> {
        &self.graph
    }

    fn check_vertex(&self, v: &TemporalVertex) -> Result<(), TemporalError> {
        self.window.check(v.time)?;
        if !self.series.contains(&v.series) {
            return Err(TemporalError::UnknownSeries(v.series.clone()));
        }
        Ok(())
    }

    pub fn add_directed(
        &mut self,
        from: &TemporalVertex,
        to: &TemporalVertex,
    ) -> Result<(), TemporalError> {
        self.check_vertex(from)?;
        self.check_vertex(to)?;
        if from.time > to.time {
            return Err(TemporalError::BackwardEdge {
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        // Only same-slice edges can close a cycle.
        if from.time == to.time && from != to {
            let (a, b) = (self.graph.index_of(from)?, self.graph.index_of(to)?);
            if self.graph.descendants_mask(&[b])[a] {
                return Err(TemporalError::Cycle {
                    from: from.to_string(),
                    to: to.to_string(),
                });
            }
        }
        self.graph.add_directed(from, to)?;
        Ok(())
    }

    pub fn add_bidirected(
        &mut self,
        a: &TemporalVertex,
        b: &TemporalVertex,
    ) -> Result<(), TemporalError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        self.graph.add_bidirected(a, b)?;
        Ok(())
    }

    pub fn add_edge(&mut self, e: &TemporalEdge) -> Result<(), TemporalError> {
        match e.kind {
            EdgeKind::Directed => self.add_directed(&e.from, &e.to),
            EdgeKind::Bidirected => self.add_bidirected(&e.from, &e.to),
        }
    }

    /// Normalized edges in canonical order.
    pub fn edges(&self) -> Vec<TemporalEdge> {
        let mut out: Vec<TemporalEdge> = self
            .graph
            .directed_edges()
            .map(|(a, b)| TemporalEdge::directed(a.clone(), b.clone()))
            .chain(
                self.graph
                    .bidirected_edges()
                    .map(|(a, b)| TemporalEdge::bidirected(a.clone(), b.clone())),
            )
            .collect();
        out.sort();
        out
    }

    pub fn parents(&self, v: &TemporalVertex) -> Result<BTreeSet<TemporalVertex>, TemporalError> {
        Ok(self.graph.parents(v)?)
    }

    /// Series-level abstraction: `X -> Y` iff some `X_{t'} -> Y_t`,
    /// `X <-> Y` iff some `X_{t'} <-> Y_t`. `gamma_max` is the window span.
    pub fn project(&self) -> SummaryCausalGraph {
        let mut scg = SummaryCausalGraph::new(self.window.span() as u32);
        for s in &self.series {
            scg.add_series(s).expect("series are distinct");
        }
        let mut seen = BTreeSet::new();
        for e in self.edges() {
            let se = e.series_edge();
            if seen.insert(se.clone()) {
                match se.kind {
                    EdgeKind::Directed => scg.add_directed(&se.from, &se.to),
                    EdgeKind::Bidirected => scg.add_bidirected(&se.from, &se.to),
                }
                .expect("deduplicated series edges");
            }
        }
        scg
    }

    /// Largest lag over directed and bidirected edges.
    pub fn max_lag(&self) -> u32 {
        self.edges()
            .iter()
            .map(|e| (e.to.time - e.from.time).unsigned_abs() as u32)
            .max()
            .unwrap_or(0)
    }

    /// Whether every edge pattern repeats at every time where it fits in the
    /// window.
    pub fn is_stationary(&self) -> bool {
        let edges: BTreeSet<TemporalEdge> = self.edges().into_iter().collect();
        let mut patterns: BTreeMap<EdgePattern, ()> = BTreeMap::new();
        for e in &edges {
            patterns.insert(
                EdgePattern {
                    kind: e.kind,
                    from: e.from.series.clone(),
                    to: e.to.series.clone(),
                    lag: (e.to.time - e.from.time) as u32,
                },
                (),
            );
        }
        patterns.keys().all(|p| {
            p.instantiate(self.window)
                .iter()
                .all(|inst| edges.contains(inst))
        })
    }
}
