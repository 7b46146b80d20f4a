//! Identifiability deciders for controlled (CDE) and natural (NDE) direct
//! effects of `X_{t-lag}` on `Y_t`, plus do-calculus rule checks on a
//! concrete full-time graph.

mod estimand;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::GraphError;
use crate::temporal::{FullTimeGraph, SummaryCausalGraph, TemporalError, TemporalVertex, Window};

pub use estimand::display_order;
pub use estimand::{EffectKind, Estimand, Expr, Level, Role};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentifyError {
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("lag {lag} exceeds gamma_max = {gamma_max}")]
    LagTooLarge { lag: u32, gamma_max: u32 },
    #[error("{treatment} is not a possible parent of {outcome}")]
    NotPossibleParent { treatment: String, outcome: String },
    #[error("the no-hidden-confounding assumption contradicts the bidirected edge {0} <-> {1}")]
    ConfoundedGraph(String, String),
    #[error("time {time} leaves {needed} step(s) of history, window starts at {start}")]
    InsufficientHeadroom { time: i64, needed: u32, start: i64 },
}

/// `X_{t-lag} -> Y_t` with treatment values `x` (reference) and `x_prime`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectQuery {
    pub treatment: String,
    pub lag: u32,
    pub outcome: String,
    pub time: i64,
    pub x: f64,
    pub x_prime: f64,
}

impl EffectQuery {
    pub fn new(treatment: &str, lag: u32, outcome: &str, time: i64) -> Self {
        Self {
            treatment: treatment.to_string(),
            lag,
            outcome: outcome.to_string(),
            time,
            x: 0.0,
            x_prime: 1.0,
        }
    }

    pub fn with_values(mut self, x: f64, x_prime: f64) -> Self {
        self.x = x;
        self.x_prime = x_prime;
        self
    }

    pub fn treatment_vertex(&self) -> TemporalVertex {
        TemporalVertex::new(self.treatment.clone(), self.time - self.lag as i64)
    }

    pub fn outcome_vertex(&self) -> TemporalVertex {
        TemporalVertex::new(self.outcome.clone(), self.time)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentifyOptions {
    /// Assume independent exogenous noise. Enables the adjustment
    /// impossibility verdict for CDE.
    pub assume_no_hidden_confounding: bool,
    /// Truncate possible-parent sets to this window when building estimands.
    pub window: Option<Window>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Identifiable,
    NotIdentifiableByAdjustment,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Identifiable => "IDENTIFIABLE",
            Status::NotIdentifiableByAdjustment => "NOT_IDENTIFIABLE_BY_ADJUSTMENT",
            Status::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    /// 1-based position in the checklist.
    pub index: usize,
    pub statement: String,
    pub holds: bool,
    /// The evaluated quantity, e.g. `scc(X) = {X, W}`.
    pub detail: String,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let state = if self.holds { "holds" } else { "failed" };
        write!(f, "condition {} {}: {}", self.index, state, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub effect: EffectKind,
    pub status: Status,
    pub conditions: Vec<Condition>,
    /// Directed cycle through the outcome, for the adjustment impossibility
    /// verdict. Starts and ends at the outcome.
    pub cycle: Option<Vec<String>>,
}

impl Verdict {
    pub fn failed(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.holds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    pub verdict: Verdict,
    pub estimand: Option<Estimand>,
}

/// `{first, rest...}` with the rest sorted.
fn render_series_set(first: &str, set: &BTreeSet<String>) -> String {
    if set.is_empty() {
        return "∅".to_string();
    }
    let mut items: Vec<&str> = Vec::new();
    if set.contains(first) {
        items.push(first);
    }
    items.extend(set.iter().map(String::as_str).filter(|s| *s != first));
    format!("{{{}}}", items.join(", "))
}

fn render_vertex_set(set: &BTreeSet<TemporalVertex>, reference: i64) -> String {
    if set.is_empty() {
        return "∅".to_string();
    }
    let names: Vec<String> = display_order(set.iter().cloned())
        .iter()
        .map(|v| v.relative(reference))
        .collect();
    format!("{{{}}}", names.join(", "))
}

fn scc_condition(
    scg: &SummaryCausalGraph,
    index: usize,
    v: &str,
) -> Result<Condition, IdentifyError> {
    let scc = scg.scc(v)?;
    Ok(Condition {
        index,
        statement: format!("scc({v}) ⊆ {{{v}}}"),
        holds: scc.iter().all(|s| s == v),
        detail: format!("scc({v}) = {}", render_series_set(v, &scc)),
    })
}

/// No ancestor of `y` is joined to `target` by a bidirected edge.
fn confounding_condition(
    scg: &SummaryCausalGraph,
    index: usize,
    y: &str,
    target: &str,
) -> Result<Condition, IdentifyError> {
    let ancestors = scg.ancestors(y)?;
    let spouses = scg.confounded_with(target)?;
    let bad: BTreeSet<String> = ancestors.intersection(&spouses).cloned().collect();
    let detail = if bad.is_empty() {
        format!("no ancestor of {y} is confounded with {target}")
    } else {
        format!(
            "{} ⊆ An({y}) confounded with {target}",
            render_series_set(target, &bad)
        )
    };
    Ok(Condition {
        index,
        statement: format!("no Z ∈ An({y}) with Z <-> {target}"),
        holds: bad.is_empty(),
        detail,
    })
}

/// Shortest directed cycle through `y` with at least one other vertex.
fn cycle_through(scg: &SummaryCausalGraph, y: &str) -> Option<Vec<String>> {
    let g = scg.graph();
    let start = g.index_of(&y.to_string()).ok()?;
    let mut prev = vec![usize::MAX; g.len()];
    let mut queue = VecDeque::new();
    for &w in g.children_idx(start) {
        if w != start && prev[w] == usize::MAX {
            prev[w] = start;
            queue.push_back(w);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.children_idx(u) {
            if w == start {
                let mut chain = vec![u];
                let mut cur = u;
                while prev[cur] != start {
                    cur = prev[cur];
                    chain.push(cur);
                }
                chain.push(start);
                chain.reverse();
                chain.push(start);
                return Some(chain.into_iter().map(|i| g.vertex(i).clone()).collect());
            }
            if w != start && prev[w] == usize::MAX {
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

fn validate(
    scg: &SummaryCausalGraph,
    q: &EffectQuery,
    opts: &IdentifyOptions,
) -> Result<(), IdentifyError> {
    if q.lag > scg.gamma_max() {
        return Err(IdentifyError::LagTooLarge {
            lag: q.lag,
            gamma_max: scg.gamma_max(),
        });
    }
    let pp = scg.possible_parents(&q.outcome, q.time)?;
    scg.parents(&q.treatment)?;
    if !pp.contains(&q.treatment_vertex()) {
        return Err(IdentifyError::NotPossibleParent {
            treatment: q.treatment_vertex().relative(q.time),
            outcome: q.outcome_vertex().relative(q.time),
        });
    }
    if let Some(w) = opts.window {
        for t in [q.time, q.time - q.lag as i64] {
            if !w.contains(t) {
                return Err(TemporalError::OutsideWindow {
                    time: t,
                    start: w.start,
                    end: w.end,
                }
                .into());
            }
        }
    }
    if opts.assume_no_hidden_confounding {
        if let Some((a, b)) = scg.graph().bidirected_edges().next() {
            return Err(IdentifyError::ConfoundedGraph(a.clone(), b.clone()));
        }
    }
    Ok(())
}

fn pp(
    scg: &SummaryCausalGraph,
    y: &str,
    t: i64,
    window: Option<Window>,
) -> Result<BTreeSet<TemporalVertex>, IdentifyError> {
    Ok(match window {
        Some(w) => scg.possible_parents_in(y, t, w)?,
        None => scg.possible_parents(y, t)?,
    })
}

fn adjustment_set(
    scg: &SummaryCausalGraph,
    q: &EffectQuery,
    window: Option<Window>,
) -> Result<Vec<TemporalVertex>, IdentifyError> {
    let mut z = pp(scg, &q.outcome, q.time, window)?;
    z.remove(&q.treatment_vertex());
    Ok(display_order(z))
}

/// Decide whether the controlled direct effect is identifiable from the SCG.
///
/// Identifiable when `scc(Y) ⊆ {Y}` and no ancestor of `Y` (including `Y`
/// itself) shares a bidirected edge with `Y`. Under the no-hidden-confounding
/// assumption, a cycle through `Y` and another series rules out adjustment.
pub fn check_cde(
    scg: &SummaryCausalGraph,
    q: &EffectQuery,
    opts: &IdentifyOptions,
) -> Result<Identification, IdentifyError> {
    validate(scg, q, opts)?;
    let conditions = vec![
        scc_condition(scg, 1, &q.outcome)?,
        confounding_condition(scg, 2, &q.outcome, &q.outcome)?,
    ];
    let (status, cycle) = if conditions.iter().all(|c| c.holds) {
        (Status::Identifiable, None)
    } else if opts.assume_no_hidden_confounding && !conditions[0].holds {
        (
            Status::NotIdentifiableByAdjustment,
            cycle_through(scg, &q.outcome),
        )
    } else {
        (Status::Unknown, None)
    };
    let estimand = if status == Status::Identifiable {
        Some(Estimand::cde(
            q.outcome_vertex(),
            q.treatment_vertex(),
            q.x,
            q.x_prime,
            adjustment_set(scg, q, opts.window)?,
        ))
    } else {
        None
    };
    Ok(Identification {
        verdict: Verdict {
            effect: EffectKind::Cde,
            status,
            conditions,
            cycle,
        },
        estimand,
    })
}

/// Decide whether the natural direct effect is identifiable from the SCG.
///
/// Five sufficient conditions; failing any gives `Unknown`, never a negative
/// verdict.
pub fn check_nde(
    scg: &SummaryCausalGraph,
    q: &EffectQuery,
    opts: &IdentifyOptions,
) -> Result<Identification, IdentifyError> {
    validate(scg, q, opts)?;
    let x_t = q.treatment_vertex();
    // Overlap is judged on the untruncated sets so the verdict never depends
    // on where the window starts.
    let pp_x = scg.possible_parents(&q.treatment, x_t.time)?;
    let pp_y = scg.possible_parents(&q.outcome, q.time)?;
    let overlap: BTreeSet<TemporalVertex> = pp_x.intersection(&pp_y).cloned().collect();
    let c3 = Condition {
        index: 3,
        statement: format!(
            "PP({}) ∩ PP({}) = ∅",
            x_t.relative(q.time),
            q.outcome_vertex().relative(q.time)
        ),
        holds: overlap.is_empty(),
        detail: format!(
            "PP({}) ∩ PP({}) = {}",
            x_t.relative(q.time),
            q.outcome_vertex().relative(q.time),
            render_vertex_set(&overlap, q.time)
        ),
    };
    let conditions = vec![
        scc_condition(scg, 1, &q.outcome)?,
        scc_condition(scg, 2, &q.treatment)?,
        c3,
        confounding_condition(scg, 4, &q.outcome, &q.outcome)?,
        confounding_condition(scg, 5, &q.outcome, &q.treatment)?,
    ];
    let ok = conditions.iter().all(|c| c.holds);
    let estimand = if ok {
        let a = display_order(pp(scg, &q.treatment, x_t.time, opts.window)?);
        Some(Estimand::nde(
            q.outcome_vertex(),
            x_t,
            q.x,
            q.x_prime,
            adjustment_set(scg, q, opts.window)?,
            a,
        ))
    } else {
        None
    };
    Ok(Identification {
        verdict: Verdict {
            effect: EffectKind::Nde,
            status: if ok {
                Status::Identifiable
            } else {
                Status::Unknown
            },
            conditions,
            cycle: None,
        },
        estimand,
    })
}

/// The possible parents of `y_t`: intervening on them is equivalent to
/// intervening on the true parents in any compatible graph. Requires
/// `gamma_max` slices of history inside `window`.
pub fn parent_reduction(
    scg: &SummaryCausalGraph,
    y: &str,
    t: i64,
    window: Window,
) -> Result<BTreeSet<TemporalVertex>, IdentifyError> {
    if t - (scg.gamma_max() as i64) < window.start {
        return Err(IdentifyError::InsufficientHeadroom {
            time: t,
            needed: scg.gamma_max(),
            start: window.start,
        });
    }
    Ok(scg.possible_parents_in(y, t, window)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    R1,
    R2,
    R3,
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "R1" => Ok(Rule::R1),
            "R2" => Ok(Rule::R2),
            "R3" => Ok(Rule::R3),
            _ => Err(format!("unknown rule `{s}`")),
        }
    }
}

/// Whether do-calculus rule `rule` rewrites `P(y | do(z), x, w)` (R1),
/// `P(y | do(z), do(x), w)` (R2, to observing `x`) or `P(y | do(z), do(x), w)`
/// (R3, to dropping `x`) in `g`. `z` is the set already intervened on.
pub fn rule_applicable(
    g: &FullTimeGraph,
    rule: Rule,
    y: &[TemporalVertex],
    x: &[TemporalVertex],
    z: &[TemporalVertex],
    w: &[TemporalVertex],
) -> Result<bool, IdentifyError> {
    let base = g.graph();
    let idx = |vs: &[TemporalVertex]| -> Result<Vec<usize>, GraphError> {
        vs.iter().map(|v| base.index_of(v)).collect()
    };
    let (yi, xi, zi, wi) = (idx(y)?, idx(x)?, idx(z)?, idx(w)?);
    base.check_disjoint(&[&yi, &xi, &zi, &wi])?;
    let given: Vec<usize> = zi.iter().chain(&wi).copied().collect();
    let mutilated = match rule {
        Rule::R1 => base.mutilate_idx(&zi, &[]),
        Rule::R2 => base.mutilate_idx(&zi, &xi),
        Rule::R3 => {
            let gz = base.mutilate_idx(&zi, &[]);
            let an_w = gz.ancestors_mask(&wi);
            let mut over = zi.clone();
            over.extend(xi.iter().copied().filter(|&v| !an_w[v]));
            base.mutilate_idx(&over, &[])
        }
    };
    Ok(mutilated.d_separated_idx(&yi, &xi, &given))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1a() -> SummaryCausalGraph {
        SummaryCausalGraph::from_edges(
            &["X", "W", "Y"],
            &[
                ("X", "W"),
                ("X", "Y"),
                ("W", "Y"),
                ("Y", "W"),
                ("X", "X"),
                ("Y", "Y"),
                ("W", "W"),
            ],
            &[],
            1,
        )
        .unwrap()
    }

    #[test]
    fn cde_not_identifiable_under_assumption() {
        let opts = IdentifyOptions {
            assume_no_hidden_confounding: true,
            window: None,
        };
        let r = check_cde(&fig1a(), &EffectQuery::new("X", 1, "Y", 10), &opts).unwrap();
        assert_eq!(r.verdict.status, Status::NotIdentifiableByAdjustment);
        assert_eq!(
            r.verdict.cycle,
            Some(vec!["Y".to_string(), "W".to_string(), "Y".to_string()])
        );
        assert!(r.estimand.is_none());
    }

    #[test]
    fn cde_unknown_without_assumption() {
        let r = check_cde(
            &fig1a(),
            &EffectQuery::new("X", 1, "Y", 10),
            &IdentifyOptions::default(),
        )
        .unwrap();
        assert_eq!(r.verdict.status, Status::Unknown);
        assert_eq!(r.verdict.failed().next().unwrap().detail, "scc(Y) = {Y, W}");
    }

    #[test]
    fn bidirected_self_loop_blocks_cde() {
        let scg = SummaryCausalGraph::from_edges(&[], &[("X", "Y")], &[("Y", "Y")], 1).unwrap();
        let r = check_cde(&scg, &EffectQuery::new("X", 0, "Y", 3), &IdentifyOptions::default())
            .unwrap();
        assert_eq!(r.verdict.status, Status::Unknown);
    }

    #[test]
    fn treatment_must_be_possible_parent() {
        let scg = SummaryCausalGraph::from_edges(&[], &[("X", "Y")], &[], 1).unwrap();
        let err = check_cde(&scg, &EffectQuery::new("Y", 1, "X", 3), &IdentifyOptions::default());
        assert!(matches!(err, Err(IdentifyError::NotPossibleParent { .. })));
        let err = check_cde(&scg, &EffectQuery::new("X", 2, "Y", 3), &IdentifyOptions::default());
        assert!(matches!(err, Err(IdentifyError::LagTooLarge { .. })));
    }

    #[test]
    fn assumption_rejects_confounded_graph() {
        let scg = SummaryCausalGraph::from_edges(&[], &[("X", "Y")], &[("X", "Y")], 1).unwrap();
        let opts = IdentifyOptions {
            assume_no_hidden_confounding: true,
            window: None,
        };
        assert!(matches!(
            check_cde(&scg, &EffectQuery::new("X", 0, "Y", 3), &opts),
            Err(IdentifyError::ConfoundedGraph(..))
        ));
    }

    #[test]
    fn simple_nde_estimand() {
        let scg = SummaryCausalGraph::from_edges(&[], &[("X", "W"), ("W", "Y"), ("X", "Y")], &[], 0)
            .unwrap();
        let r = check_nde(&scg, &EffectQuery::new("X", 0, "Y", 0), &IdentifyOptions::default())
            .unwrap();
        assert_eq!(r.verdict.status, Status::Identifiable);
        let e = r.estimand.unwrap();
        assert_eq!(e.z, vec![TemporalVertex::new("W", 0)]);
        assert!(e.a.is_empty());
    }

    #[test]
    fn headroom() {
        let scg = SummaryCausalGraph::from_edges(&[], &[("X", "Y")], &[], 1).unwrap();
        let w = Window::slices(2).unwrap();
        assert!(parent_reduction(&scg, "Y", 0, w).is_err());
        assert_eq!(parent_reduction(&scg, "Y", 1, w).unwrap().len(), 2);
        let iso = SummaryCausalGraph::from_edges(&["Y"], &[], &[], 0).unwrap();
        assert!(parent_reduction(&iso, "Y", 0, Window::slices(1).unwrap())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn r3_on_edgeless_graph() {
        let g = FullTimeGraph::new(["X".into(), "Y".into()], Window::slices(1).unwrap()).unwrap();
        let (x, y) = (TemporalVertex::new("X", 0), TemporalVertex::new("Y", 0));
        assert!(rule_applicable(&g, Rule::R3, &[y], &[x], &[], &[]).unwrap());
    }
}
