use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{build_graph, edge, Edge, Graph, GraphKind, Vertex};
use crate::error::{Error, Result};
use crate::formula::Qbf;

/// A maximal path of `H = G − D` whose inner vertices have degree two in `H`
/// and are not endpoints of a deleted edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanPath {
    /// All vertices in path order, endpoints included.
    pub vertices: Vec<Vertex>,
}

impl CleanPath {
    pub fn inner(&self) -> &[Vertex] {
        &self.vertices[1..self.vertices.len() - 1]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CleanStructure {
    /// Edges of `H` that lie in no triangle of `G`.
    pub clean_edges: Vec<Edge>,
    pub paths: Vec<CleanPath>,
    /// Endpoints of the deleted edges.
    pub fes_vertices: BTreeSet<Vertex>,
}

fn in_triangle(g: &Graph, (u, v): Edge) -> bool {
    g.neighbors(u).iter().any(|&w| w != v && g.has_edge(w, v))
}

/// Clean edges and maximal clean paths of the forest left by a feedback edge set.
pub fn clean_structure(q: &Qbf, kind: GraphKind, fes: &[Edge]) -> Result<CleanStructure> {
    let g = build_graph(q, kind);
    clean_structure_of(&g, fes)
}

pub(crate) fn clean_structure_of(g: &Graph, fes: &[Edge]) -> Result<CleanStructure> {
    let deleted: BTreeSet<Edge> = fes.iter().map(|&(u, v)| edge(u, v)).collect();
    if let Some(e) = deleted.iter().find(|e| !g.has_edge(e.0, e.1)) {
        return Err(Error::pre(format!(
            "{}-{} is not an edge of the graph",
            e.0, e.1
        )));
    }
    let h = g.without_edges(&deleted);
    if !h.is_acyclic() {
        return Err(Error::pre(
            "not a feedback edge set: the remainder has a cycle",
        ));
    }
    let fes_vertices: BTreeSet<Vertex> = deleted.iter().flat_map(|&(u, v)| [u, v]).collect();
    let clean_edges = h
        .edges()
        .iter()
        .copied()
        .filter(|&e| !in_triangle(g, e))
        .collect();

    let inner_ok = |v: Vertex| h.degree(v) == 2 && !fes_vertices.contains(&v);
    let mut used: BTreeSet<Vertex> = BTreeSet::new();
    let mut paths = Vec::new();
    for v in h.vertices().filter(|&v| inner_ok(v)) {
        if used.contains(&v) {
            continue;
        }
        // Walk both directions to the first vertex that cannot be inner.
        let mut run = vec![v];
        used.insert(v);
        let mut ends = Vec::new();
        for &start in h.neighbors(v) {
            let mut prev = v;
            let mut cur = start;
            let mut side = Vec::new();
            while inner_ok(cur) && !used.contains(&cur) {
                used.insert(cur);
                side.push(cur);
                let next = *h
                    .neighbors(cur)
                    .iter()
                    .find(|&&n| n != prev)
                    .expect("degree two");
                prev = cur;
                cur = next;
            }
            ends.push((side, cur));
        }
        let (left, left_end) = ends.remove(0);
        let (right, right_end) = ends.remove(0);
        let mut vertices = vec![left_end];
        vertices.extend(left.into_iter().rev());
        vertices.append(&mut run);
        vertices.extend(right);
        vertices.push(right_end);
        if vertices.first() > vertices.last() {
            vertices.reverse();
        }
        paths.push(CleanPath { vertices });
    }
    // Edges joining two vertices that cannot be inner are clean paths without inner vertices.
    for &(u, v) in h.edges() {
        if !inner_ok(u) && !inner_ok(v) {
            paths.push(CleanPath {
                vertices: vec![u, v],
            });
        }
    }
    paths.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(CleanStructure {
        clean_edges,
        paths,
        fes_vertices,
    })
}
