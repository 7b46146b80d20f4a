//! JSON graph files and DOT export.
//!
//! Summary graphs list plain series names; full-time graphs list
//! `series@time` names and carry a `window`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::temporal::{
    EdgeKind, FullTimeGraph, SummaryCausalGraph, TemporalEdge, TemporalError, TemporalVertex, Window,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKindName {
    Directed,
    Bidirected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    pub kind: EdgeKindName,
}

/// The on-disk graph document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeEntry>,
    pub gamma_max: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
}

/// A parsed graph file.
#[derive(Debug, Clone)]
pub enum Loaded {
    Summary {
        scg: SummaryCausalGraph,
        window: Option<Window>,
    },
    FullTime {
        graph: FullTimeGraph,
        gamma_max: u32,
    },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Invalid(msg.into()))
}

impl GraphFile {
    pub fn from_json(s: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph files serialize");
        s.push('\n');
        s
    }

    pub fn load(&self) -> Result<Loaded, FormatError> {
        let timed = self.vertices.iter().filter(|v| v.contains('@')).count();
        if timed == 0 {
            return self.load_summary().map(|(scg, window)| Loaded::Summary { scg, window });
        }
        if timed != self.vertices.len() {
            return invalid("vertex names mix series and series@time forms");
        }
        self.load_full_time()
            .map(|graph| Loaded::FullTime {
                graph,
                gamma_max: self.gamma_max,
            })
    }

    fn window(&self) -> Result<Option<Window>, FormatError> {
        self.window
            .map(|[a, b]| Window::new(a, b))
            .transpose()
            .map_err(FormatError::from)
    }

    fn load_summary(&self) -> Result<(SummaryCausalGraph, Option<Window>), FormatError> {
        let mut scg = SummaryCausalGraph::new(self.gamma_max);
        for v in &self.vertices {
            scg.add_series(v)?;
        }
        for e in &self.edges {
            match e.kind {
                EdgeKindName::Directed => scg.add_directed(&e.from, &e.to)?,
                EdgeKindName::Bidirected => scg.add_bidirected(&e.from, &e.to)?,
            }
        }
        let window = self.window()?;
        if let Some(w) = window {
            scg.check_window(w)?;
        }
        Ok((scg, window))
    }

    fn load_full_time(&self) -> Result<FullTimeGraph, FormatError> {
        let window = match self.window()? {
            Some(w) => w,
            None => return invalid("a full-time graph needs a window"),
        };
        let parse = |name: &str| {
            TemporalVertex::parse(name)
                .ok_or_else(|| FormatError::Invalid(format!("`{name}` is not series@time")))
        };
        let mut series: Vec<String> = Vec::new();
        for name in &self.vertices {
            let v = parse(name)?;
            window.check(v.time)?;
            if !series.contains(&v.series) {
                series.push(v.series);
            }
        }
        let mut g = FullTimeGraph::new(series, window)?;
        for e in &self.edges {
            let (a, b) = (parse(&e.from)?, parse(&e.to)?);
            let lag = (b.time - a.time).unsigned_abs();
            if lag > self.gamma_max as u64 {
                return invalid(format!("edge {a} - {b} spans more than gamma_max"));
            }
            match e.kind {
                EdgeKindName::Directed => g.add_directed(&a, &b)?,
                EdgeKindName::Bidirected => g.add_bidirected(&a, &b)?,
            }
        }
        Ok(g)
    }

    pub fn from_summary(scg: &SummaryCausalGraph, window: Option<Window>) -> Self {
        let g = scg.graph();
        let edges = g
            .directed_edges()
            .map(|(a, b)| (a, b, EdgeKindName::Directed))
            .chain(g.bidirected_edges().map(|(a, b)| (a, b, EdgeKindName::Bidirected)))
            .map(|(a, b, kind)| EdgeEntry {
                from: a.clone(),
                to: b.clone(),
                kind,
            })
            .collect();
        Self {
            vertices: scg.series().to_vec(),
            edges,
            gamma_max: scg.gamma_max(),
            window: window.map(|w| [w.start, w.end]),
        }
    }

    pub fn from_full_time(g: &FullTimeGraph, gamma_max: u32) -> Self {
        let w = g.window();
        Self {
            vertices: g.graph().vertices().iter().map(|v| v.to_string()).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeEntry {
                    from: e.from.to_string(),
                    to: e.to.to_string(),
                    kind: match e.kind {
                        EdgeKind::Directed => EdgeKindName::Directed,
                        EdgeKind::Bidirected => EdgeKindName::Bidirected,
                    },
                })
                .collect(),
            gamma_max,
            window: Some([w.start, w.end]),
        }
    }
}

impl Loaded {
    pub fn to_file(&self) -> GraphFile {
        match self {
            Loaded::Summary { scg, window } => GraphFile::from_summary(scg, *window),
            Loaded::FullTime { graph, gamma_max } => GraphFile::from_full_time(graph, *gamma_max),
        }
    }
}

/// Parse and load a graph document.
pub fn parse_graph(s: &str) -> Result<Loaded, FormatError> {
    GraphFile::from_json(s)?.load()
}

/// Parse a document that must hold a summary graph.
pub fn parse_summary(s: &str) -> Result<(SummaryCausalGraph, Option<Window>), FormatError> {
    match parse_graph(s)? {
        Loaded::Summary { scg, window } => Ok((scg, window)),
        Loaded::FullTime { .. } => invalid("expected a summary graph, found a full-time graph"),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn dot_edge(out: &mut String, a: &str, b: &str, kind: EdgeKind) {
    let style = match kind {
        EdgeKind::Directed => "",
        EdgeKind::Bidirected => " [dir=both, style=dashed]",
    };
    let _ = writeln!(out, "  {} -> {}{style};", quote(a), quote(b));
}

pub fn summary_to_dot(scg: &SummaryCausalGraph) -> String {
    let mut out = String::from("digraph scg {\n");
    for s in scg.series() {
        let _ = writeln!(out, "  {};", quote(s));
    }
    for (a, b) in scg.graph().directed_edges() {
        dot_edge(&mut out, a, b, EdgeKind::Directed);
    }
    for (a, b) in scg.graph().bidirected_edges() {
        dot_edge(&mut out, a, b, EdgeKind::Bidirected);
    }
    out.push_str("}\n");
    out
}

/// One rank per time slice.
pub fn full_time_to_dot(g: &FullTimeGraph) -> String {
    let mut out = String::from("digraph full_time {\n  rankdir=LR;\n");
    for t in g.window().times() {
        let names: Vec<String> = g
            .series()
            .iter()
            .map(|s| quote(&TemporalVertex::new(s.clone(), t).to_string()))
            .collect();
        let _ = writeln!(out, "  {{ rank=same; {}; }}", names.join("; "));
    }
    for TemporalEdge { kind, from, to } in g.edges() {
        dot_edge(&mut out, &from.to_string(), &to.to_string(), kind);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCG: &str = r#"{
  "vertices": ["X", "Y"],
  "edges": [
    {"from": "X", "to": "Y", "kind": "directed"},
    {"from": "Y", "to": "Y", "kind": "directed"},
    {"from": "X", "to": "Y", "kind": "bidirected"}
  ],
  "gamma_max": 1
}"#;

    #[test]
    fn summary_roundtrip() {
        let file = GraphFile::from_json(SCG).unwrap();
        let loaded = file.load().unwrap();
        assert!(matches!(loaded, Loaded::Summary { .. }));
        assert_eq!(loaded.to_file(), file);
    }

    #[test]
    fn full_time_roundtrip() {
        let file = GraphFile {
            vertices: ["X@0", "Y@0", "X@1", "Y@1"].map(String::from).to_vec(),
            edges: vec![
                EdgeEntry {
                    from: "X@0".into(),
                    to: "Y@1".into(),
                    kind: EdgeKindName::Directed,
                },
                EdgeEntry {
                    from: "X@1".into(),
                    to: "Y@1".into(),
                    kind: EdgeKindName::Bidirected,
                },
            ],
            gamma_max: 1,
            window: Some([0, 1]),
        };
        let loaded = file.load().unwrap();
        assert!(matches!(loaded, Loaded::FullTime { .. }));
        assert_eq!(loaded.to_file(), file);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(parse_graph("{").is_err());
        assert!(parse_graph(r#"{"vertices": ["X@0", "Y"], "edges": [], "gamma_max": 0, "window": [0, 0]}"#).is_err());
        assert!(parse_graph(r#"{"vertices": ["X@0"], "edges": [], "gamma_max": 0}"#).is_err());
        assert!(parse_graph(r#"{"vertices": ["X"], "edges": [{"from": "X", "to": "Z", "kind": "directed"}], "gamma_max": 0}"#).is_err());
        assert!(parse_graph(r#"{"vertices": ["X"], "edges": [], "gamma_max": 2, "window": [0, 1]}"#).is_err());
        assert!(parse_graph(r#"{"vertices": ["X"], "edges": [], "gamma_max": 0, "extra": 1}"#).is_err());
    }

    #[test]
    fn dot_marks_bidirected_edges() {
        let (scg, _) = parse_summary(SCG).unwrap();
        let dot = summary_to_dot(&scg);
        assert!(dot.contains("\"X\" -> \"Y\" [dir=both, style=dashed];"));
        assert!(dot.contains("\"Y\" -> \"Y\";"));
    }
}
