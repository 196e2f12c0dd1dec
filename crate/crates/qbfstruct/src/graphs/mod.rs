//! Primal and incidence graphs, structural parameters and decomposition validators.

mod clean;
mod decomp;
mod params;

pub(crate) use clean::clean_structure_of;
pub use clean::{clean_structure, CleanPath, CleanStructure};
pub use decomp::{
    min_degree_decomposition, validate_alpha_td, validate_decomposition, validate_td,
    validate_treedepth, AlphaTd, Decomposition, Report, TreeDecomposition, TreedepthDecomposition,
};
pub use params::{
    enumerate_c_deletion_sets, is_deletion_set, is_sparse, min_deletion_set, min_fes,
    spanning_forest, DeletionKind, SpanningForest,
};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::{Qbf, Var};

/// A graph vertex: a variable, or a clause/term by its index in the matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Vertex {
    Var(Var),
    Clause(usize),
    Term(usize),
}

impl Vertex {
    pub fn as_var(self) -> Option<Var> {
        match self {
            Vertex::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Var(v) => write!(f, "x{v}"),
            Vertex::Clause(i) => write!(f, "c{i}"),
            Vertex::Term(i) => write!(f, "t{i}"),
        }
    }
}

/// An undirected edge with its endpoints in ascending order.
pub type Edge = (Vertex, Vertex);

pub fn edge(u: Vertex, v: Vertex) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphKind {
    Primal,
    Incidence,
}

impl std::str::FromStr for GraphKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "primal" => Ok(GraphKind::Primal),
            "incidence" => Ok(GraphKind::Incidence),
            _ => Err(format!("unknown graph kind `{s}`")),
        }
    }
}

/// A simple undirected graph that remembers edge insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    adj: BTreeMap<Vertex, Vec<Vertex>>,
    edges: Vec<Edge>,
    edge_set: BTreeSet<Edge>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: Vertex) {
        self.adj.entry(v).or_default();
    }

    /// Add an edge; loops and repeated edges are ignored. Returns whether it was new.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> bool {
        if u == v || !self.edge_set.insert(edge(u, v)) {
            return false;
        }
        self.adj.entry(u).or_default().push(v);
        self.adj.entry(v).or_default().push(u);
        self.edges.push(edge(u, v));
        true
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.adj.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_set.contains(&edge(u, v))
    }

    /// Neighbours in edge insertion order.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        self.adj.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.neighbors(v).len()
    }

    /// `G − S` for a vertex set.
    pub fn without_vertices(&self, removed: &BTreeSet<Vertex>) -> Graph {
        let mut g = Graph::new();
        for v in self.vertices().filter(|v| !removed.contains(v)) {
            g.add_vertex(v);
        }
        for &(u, v) in &self.edges {
            if !removed.contains(&u) && !removed.contains(&v) {
                g.add_edge(u, v);
            }
        }
        g
    }

    /// `G − D` for an edge set.
    pub fn without_edges(&self, removed: &BTreeSet<Edge>) -> Graph {
        let mut g = Graph::new();
        for v in self.vertices() {
            g.add_vertex(v);
        }
        for &(u, v) in &self.edges {
            if !removed.contains(&(u, v)) {
                g.add_edge(u, v);
            }
        }
        g
    }

    /// Connected components, each sorted, listed by smallest vertex.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.vertices() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in self.neighbors(u) {
                    if seen.insert(w) {
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    pub fn is_acyclic(&self) -> bool {
        self.edge_count() + self.components().len() == self.vertex_count()
    }

    /// Graphviz text.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for v in self.vertices() {
            out.push_str(&format!("  \"{v}\";\n"));
        }
        for (u, v) in &self.edges {
            out.push_str(&format!("  \"{u}\" -- \"{v}\";\n"));
        }
        out.push_str("}\n");
        out
    }

    /// One edge per line.
    pub fn to_edge_list(&self) -> String {
        self.edges
            .iter()
            .map(|(u, v)| format!("{u} {v}\n"))
            .collect()
    }
}

/// Primal or incidence graph of a formula.
///
/// Every prefix variable is a vertex, including ones absent from the matrix.
/// For a CDNF the graph is the union of the graphs of both parts.
pub fn build_graph(q: &Qbf, kind: GraphKind) -> Graph {
    let mut g = Graph::new();
    for &(_, v) in &q.prefix {
        g.add_vertex(Vertex::Var(v));
    }
    let parts = [
        (q.clauses(), Vertex::Clause as fn(usize) -> Vertex),
        (q.terms(), Vertex::Term as fn(usize) -> Vertex),
    ];
    for (sets, tag) in parts {
        for (i, set) in sets.iter().enumerate() {
            match kind {
                GraphKind::Primal => {
                    for (a, l) in set.iter().enumerate() {
                        for m in &set[a + 1..] {
                            g.add_edge(Vertex::Var(l.var()), Vertex::Var(m.var()));
                        }
                    }
                }
                GraphKind::Incidence => {
                    g.add_vertex(tag(i));
                    for l in set {
                        g.add_edge(tag(i), Vertex::Var(l.var()));
                    }
                }
            }
        }
    }
    g
}

/// Variables of a vertex set, ignoring clause and term vertices.
pub fn var_set(vertices: &BTreeSet<Vertex>) -> BTreeSet<Var> {
    vertices.iter().filter_map(|v| v.as_var()).collect()
}

/// Vertex set of a variable set.
pub fn vertex_set(vars: &BTreeSet<Var>) -> BTreeSet<Vertex> {
    vars.iter().map(|&v| Vertex::Var(v)).collect()
}
