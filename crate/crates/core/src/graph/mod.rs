//! Mixed graphs: directed edges plus bidirected (hidden-confounding) edges.
//!
//! The same type backs series-level summary graphs, where directed and
//! bidirected self-loops are meaningful, and full-time graphs over temporal
//! vertices, where they are rejected.

mod dsep;
pub mod paths;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use thiserror::Error;

pub use paths::{Path, Step};

/// Anything usable as a vertex id.
pub trait VertexId: Clone + Eq + Ord + Hash + fmt::Display + fmt::Debug {}

impl<T: Clone + Eq + Ord + Hash + fmt::Display + fmt::Debug> VertexId for T {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate {kind} edge between `{from}` and `{to}`")]
    DuplicateEdge {
        kind: &'static str,
        from: String,
        to: String,
    },
    #[error("self-loop on `{0}` is not allowed in this graph")]
    SelfLoop(String),
    #[error("vertex sets overlap on `{0}`")]
    OverlappingSets(String),
}

#[derive(Debug, Clone)]
pub struct MixedGraph<V> {
    vertices: Vec<V>,
    index: HashMap<V, usize>,
    directed: Vec<(usize, usize)>,
    bidirected: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    spouses: Vec<Vec<usize>>,
    self_loops: bool,
}

impl<V: VertexId> MixedGraph<V> {
    /// An empty graph. `self_loops` admits `v -> v` and `v <-> v`, which only
    /// series-level graphs use.
    pub fn new(self_loops: bool) -> Self {
        Self {
            vertices: Vec::new(),
            index: HashMap::new(),
            directed: Vec::new(),
            bidirected: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
            spouses: Vec::new(),
            self_loops,
        }
    }

    pub fn with_vertices<I: IntoIterator<Item = V>>(
        vertices: I,
        self_loops: bool,
    ) -> Result<Self, GraphError> {
        let mut g = Self::new(self_loops);
        for v in vertices {
            g.add_vertex(v)?;
        }
        Ok(g)
    }

    pub fn allows_self_loops(&self) -> bool {
        self.self_loops
    }

    pub fn add_vertex(&mut self, v: V) -> Result<usize, GraphError> {
        if self.index.contains_key(&v) {
            return Err(GraphError::DuplicateVertex(v.to_string()));
        }
        let i = self.vertices.len();
        self.index.insert(v.clone(), i);
        self.vertices.push(v);
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        self.spouses.push(Vec::new());
        Ok(i)
    }

    pub fn add_directed(&mut self, from: &V, to: &V) -> Result<(), GraphError> {
        let (a, b) = (self.index_of(from)?, self.index_of(to)?);
        self.add_directed_idx(a, b)
    }

    pub fn add_bidirected(&mut self, a: &V, b: &V) -> Result<(), GraphError> {
        let (a, b) = (self.index_of(a)?, self.index_of(b)?);
        self.add_bidirected_idx(a, b)
    }

    pub(crate) fn add_directed_idx(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        if a == b && !self.self_loops {
            return Err(GraphError::SelfLoop(self.vertices[a].to_string()));
        }
        if self.children[a].contains(&b) {
            return Err(GraphError::DuplicateEdge {
                kind: "directed",
                from: self.vertices[a].to_string(),
                to: self.vertices[b].to_string(),
            });
        }
        self.directed.push((a, b));
        self.children[a].push(b);
        self.parents[b].push(a);
        Ok(())
    }

    pub(crate) fn add_bidirected_idx(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        if a == b && !self.self_loops {
            return Err(GraphError::SelfLoop(self.vertices[a].to_string()));
        }
        if self.spouses[a].contains(&b) {
            return Err(GraphError::DuplicateEdge {
                kind: "bidirected",
                from: self.vertices[a].to_string(),
                to: self.vertices[b].to_string(),
            });
        }
        self.bidirected.push((a, b));
        self.spouses[a].push(b);
        if a != b {
            self.spouses[b].push(a);
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[V] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: &V) -> bool {
        self.index.contains_key(v)
    }

    pub fn index_of(&self, v: &V) -> Result<usize, GraphError> {
        self.index
            .get(v)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(v.to_string()))
    }

    pub fn vertex(&self, i: usize) -> &V {
        &self.vertices[i]
    }

    /// Directed edges in insertion order.
    pub fn directed_edges(&self) -> impl Iterator<Item = (&V, &V)> + '_ {
        self.directed
            .iter()
            .map(move |&(a, b)| (&self.vertices[a], &self.vertices[b]))
    }

    /// Bidirected edges in insertion order, endpoints as inserted.
    pub fn bidirected_edges(&self) -> impl Iterator<Item = (&V, &V)> + '_ {
        self.bidirected
            .iter()
            .map(move |&(a, b)| (&self.vertices[a], &self.vertices[b]))
    }

    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.bidirected.len()
    }

    pub fn has_directed(&self, from: &V, to: &V) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.children[a].contains(&b),
            _ => false,
        }
    }

    pub fn has_bidirected(&self, a: &V, b: &V) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&a), Some(&b)) => self.spouses[a].contains(&b),
            _ => false,
        }
    }

    pub(crate) fn parents_idx(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub(crate) fn children_idx(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub(crate) fn spouses_idx(&self, v: usize) -> &[usize] {
        &self.spouses[v]
    }

    fn collect(&self, idx: impl IntoIterator<Item = usize>) -> BTreeSet<V> {
        idx.into_iter().map(|i| self.vertices[i].clone()).collect()
    }

    fn indices<'a, I>(&self, vs: I) -> Result<Vec<usize>, GraphError>
    where
        I: IntoIterator<Item = &'a V>,
        V: 'a,
    {
        vs.into_iter().map(|v| self.index_of(v)).collect()
    }

    /// Tails of directed edges into `v`. Bidirected edges contribute nothing.
    pub fn parents(&self, v: &V) -> Result<BTreeSet<V>, GraphError> {
        let i = self.index_of(v)?;
        Ok(self.collect(self.parents[i].iter().copied()))
    }

    pub fn children(&self, v: &V) -> Result<BTreeSet<V>, GraphError> {
        let i = self.index_of(v)?;
        Ok(self.collect(self.children[i].iter().copied()))
    }

    /// Vertices joined to `v` by a bidirected edge (including `v` itself for a
    /// bidirected self-loop).
    pub fn spouses(&self, v: &V) -> Result<BTreeSet<V>, GraphError> {
        let i = self.index_of(v)?;
        Ok(self.collect(self.spouses[i].iter().copied()))
    }

    /// Reflexive ancestors: `v` is always its own ancestor.
    pub fn ancestors(&self, v: &V) -> Result<BTreeSet<V>, GraphError> {
        let i = self.index_of(v)?;
        let mask = self.closure_mask(&[i], |u| &self.parents[u]);
        Ok(self.collect_mask(&mask))
    }

    /// Reflexive descendants: `v` is always its own descendant.
    pub fn descendants(&self, v: &V) -> Result<BTreeSet<V>, GraphError> {
        let i = self.index_of(v)?;
        let mask = self.closure_mask(&[i], |u| &self.children[u]);
        Ok(self.collect_mask(&mask))
    }

    pub(crate) fn ancestors_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.closure_mask(seeds, |u| &self.parents[u])
    }

    pub(crate) fn descendants_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.closure_mask(seeds, |u| &self.children[u])
    }

    fn closure_mask<'a, F>(&'a self, seeds: &[usize], next: F) -> Vec<bool>
    where
        F: Fn(usize) -> &'a Vec<usize>,
    {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &w in next(u) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    fn collect_mask(&self, mask: &[bool]) -> BTreeSet<V> {
        self.collect(mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i))
    }

    /// Strongly connected components of the directed part (Tarjan), every
    /// vertex in exactly one component, components in reverse topological
    /// order of the condensation.
    pub(crate) fn components_idx(&self) -> Vec<Vec<usize>> {
        tarjan(self.len(), |u| &self.children[u])
    }

    /// All strongly connected components, textbook convention (singletons
    /// included).
    pub fn strongly_connected_components(&self) -> Vec<BTreeSet<V>> {
        self.components_idx()
            .into_iter()
            .map(|c| self.collect(c))
            .collect()
    }

    /// Strongly connected component of `v` with the cycle-aware convention:
    /// empty when `v` lies on no cycle, `{v}` when its only cycle is a
    /// self-loop, and the full mutually-reachable set otherwise.
    pub fn scc(&self, v: &V) -> Result<BTreeSet<V>, GraphError> {
        let i = self.index_of(v)?;
        let comp = self
            .components_idx()
            .into_iter()
            .find(|c| c.contains(&i))
            .expect("tarjan covers every vertex");
        if comp.len() > 1 {
            Ok(self.collect(comp))
        } else if self.children[i].contains(&i) {
            Ok(self.collect([i]))
        } else {
            Ok(BTreeSet::new())
        }
    }

    /// `G` with every edge carrying an arrowhead into `overline` removed
    /// (directed edges into it and all incident bidirected edges) and every
    /// directed edge leaving `underline` removed.
    pub fn mutilate(&self, overline: &[V], underline: &[V]) -> Result<Self, GraphError> {
        let over = self.indices(overline)?;
        let under = self.indices(underline)?;
        Ok(self.mutilate_idx(&over, &under))
    }

    pub(crate) fn mutilate_idx(&self, overline: &[usize], underline: &[usize]) -> Self {
        let mut over = vec![false; self.len()];
        let mut under = vec![false; self.len()];
        overline.iter().for_each(|&i| over[i] = true);
        underline.iter().for_each(|&i| under[i] = true);
        let mut g = Self {
            vertices: self.vertices.clone(),
            index: self.index.clone(),
            directed: Vec::new(),
            bidirected: Vec::new(),
            parents: vec![Vec::new(); self.len()],
            children: vec![Vec::new(); self.len()],
            spouses: vec![Vec::new(); self.len()],
            self_loops: self.self_loops,
        };
        for &(a, b) in &self.directed {
            if !over[b] && !under[a] {
                g.add_directed_idx(a, b).expect("subset of a valid graph");
            }
        }
        for &(a, b) in &self.bidirected {
            if !over[a] && !over[b] {
                g.add_bidirected_idx(a, b).expect("subset of a valid graph");
            }
        }
        g
    }

    /// Whether the directed part has no cycle (self-loops count as cycles).
    pub fn is_acyclic(&self) -> bool {
        self.components_idx()
            .iter()
            .all(|c| c.len() == 1 && !self.children[c[0]].contains(&c[0]))
    }

    /// `A ⟂ B | C`: every path between `A` and `B` is blocked by `C`.
    ///
    /// Colliders are vertices with arrowheads from both path edges
    /// (`→v←`, `→v↔`, `↔v←`, `↔v↔`); a collider is open when it or one of its
    /// descendants is in `C`, a non-collider is open when it is not in `C`.
    /// The three sets must be pairwise disjoint.
    pub fn d_separated(&self, a: &[V], b: &[V], c: &[V]) -> Result<bool, GraphError> {
        let (a, b, c) = (self.indices(a)?, self.indices(b)?, self.indices(c)?);
        self.check_disjoint(&[&a, &b, &c])?;
        Ok(!dsep::d_connected(self, &a, &b, &c))
    }

    pub(crate) fn d_separated_idx(&self, a: &[usize], b: &[usize], c: &[usize]) -> bool {
        !dsep::d_connected(self, a, b, c)
    }

    pub(crate) fn check_disjoint(&self, sets: &[&[usize]]) -> Result<(), GraphError> {
        let mut owner = vec![usize::MAX; self.len()];
        for (k, set) in sets.iter().enumerate() {
            for &v in set.iter() {
                if owner[v] != usize::MAX && owner[v] != k {
                    return Err(GraphError::OverlappingSets(self.vertices[v].to_string()));
                }
                owner[v] = k;
            }
        }
        Ok(())
    }
}

/// Iterative Tarjan SCC over `0..n`.
fn tarjan<'a, F>(n: usize, succ: F) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> &'a Vec<usize>,
{
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (vertex, position in its successor list)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succs = succ(v);
            if *pos < succs.len() {
                let w = succs[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}
