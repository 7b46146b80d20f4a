//! Simple paths and the literal path-activation rule.
//!
//! Exponential in general; this is the reference the reachability-based
//! [`MixedGraph::d_separated`] is checked against, and it is also used to
//! report a concrete active path when a separation claim fails.

use std::fmt;

use super::{GraphError, MixedGraph, VertexId};

/// How one path edge is traversed, read left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// `u -> w`
    Forward,
    /// `u <- w`
    Backward,
    /// `u <-> w`
    Bidirected,
}

impl Step {
    fn head_at_start(self) -> bool {
        matches!(self, Step::Backward | Step::Bidirected)
    }

    fn head_at_end(self) -> bool {
        matches!(self, Step::Forward | Step::Bidirected)
    }

    fn symbol(self) -> &'static str {
        match self {
            Step::Forward => "->",
            Step::Backward => "<-",
            Step::Bidirected => "<->",
        }
    }
}

/// A simple path: `vertices.len() == steps.len() + 1`, no vertex repeats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path<V> {
    pub vertices: Vec<V>,
    pub steps: Vec<Step>,
}

impl<V: VertexId> Path<V> {
    /// Interior vertex `i` (1-based into `vertices`) is a collider iff both
    /// incident path edges carry an arrowhead at it.
    pub fn is_collider(&self, i: usize) -> bool {
        i > 0
            && i + 1 < self.vertices.len()
            && self.steps[i - 1].head_at_end()
            && self.steps[i].head_at_start()
    }

    /// Activated by `given`: every collider is in `given` or has a descendant
    /// in it, and no non-collider is in `given`.
    pub fn is_active(&self, g: &MixedGraph<V>, given: &[V]) -> Result<bool, GraphError> {
        for i in 1..self.vertices.len().saturating_sub(1) {
            let v = &self.vertices[i];
            if self.is_collider(i) {
                let desc = g.descendants(v)?;
                if !given.iter().any(|c| desc.contains(c)) {
                    return Ok(false);
                }
            } else if given.contains(v) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl<V: VertexId> fmt::Display for Path<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.vertices[0])?;
        for (step, v) in self.steps.iter().zip(&self.vertices[1..]) {
            write!(f, " {} {}", step.symbol(), v)?;
        }
        Ok(())
    }
}

impl<V: VertexId> MixedGraph<V> {
    /// Every simple path between `from` and `to`. Parallel edges of
    /// different kinds yield distinct paths; self-loops are never used.
    pub fn simple_paths(&self, from: &V, to: &V) -> Result<Vec<Path<V>>, GraphError> {
        let (s, t) = (self.index_of(from)?, self.index_of(to)?);
        let mut out = Vec::new();
        if s == t {
            return Ok(out);
        }
        let mut on_path = vec![false; self.len()];
        let mut vertices = vec![s];
        let mut steps = Vec::new();
        on_path[s] = true;
        self.extend_paths(t, &mut on_path, &mut vertices, &mut steps, &mut out);
        Ok(out)
    }

    fn extend_paths(
        &self,
        target: usize,
        on_path: &mut [bool],
        vertices: &mut Vec<usize>,
        steps: &mut Vec<Step>,
        out: &mut Vec<Path<V>>,
    ) {
        let u = *vertices.last().expect("non-empty path");
        let moves = self
            .children_idx(u)
            .iter()
            .map(|&w| (w, Step::Forward))
            .chain(self.parents_idx(u).iter().map(|&w| (w, Step::Backward)))
            .chain(self.spouses_idx(u).iter().map(|&w| (w, Step::Bidirected)))
            .collect::<Vec<_>>();
        for (w, step) in moves {
            if on_path[w] {
                continue;
            }
            vertices.push(w);
            steps.push(step);
            if w == target {
                out.push(Path {
                    vertices: vertices.iter().map(|&i| self.vertex(i).clone()).collect(),
                    steps: steps.clone(),
                });
            } else {
                on_path[w] = true;
                self.extend_paths(target, on_path, vertices, steps, out);
                on_path[w] = false;
            }
            vertices.pop();
            steps.pop();
        }
    }

    /// First active path between a vertex of `a` and a vertex of `b` given
    /// `c`, by exhaustive enumeration. `None` means `a` and `b` are
    /// d-separated by `c`.
    pub fn find_active_path(
        &self,
        a: &[V],
        b: &[V],
        c: &[V],
    ) -> Result<Option<Path<V>>, GraphError> {
        for x in a {
            for y in b {
                for p in self.simple_paths(x, y)? {
                    // A path through another endpoint is covered by a shorter one.
                    let interior = &p.vertices[1..p.vertices.len() - 1];
                    if interior.iter().any(|v| a.contains(v) || b.contains(v)) {
                        continue;
                    }
                    if p.is_active(self, c)? {
                        return Ok(Some(p));
                    }
                }
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges_give_distinct_paths() {
        let mut g = MixedGraph::new(false);
        for v in ["X", "Y"] {
            g.add_vertex(v.to_string()).unwrap();
        }
        g.add_directed(&"X".to_string(), &"Y".to_string()).unwrap();
        g.add_bidirected(&"X".to_string(), &"Y".to_string()).unwrap();
        let paths = g.simple_paths(&"X".to_string(), &"Y".to_string()).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].to_string(), "X -> Y");
        assert_eq!(paths[1].to_string(), "X <-> Y");
    }

    #[test]
    fn collider_classification() {
        let p = Path {
            vertices: vec!["A", "B", "C"],
            steps: vec![Step::Bidirected, Step::Backward],
        };
        assert!(p.is_collider(1));
        let p = Path {
            vertices: vec!["A", "B", "C"],
            steps: vec![Step::Bidirected, Step::Forward],
        };
        assert!(!p.is_collider(1));
    }
}
