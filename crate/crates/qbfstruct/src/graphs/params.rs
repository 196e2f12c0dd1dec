use std::collections::{BTreeMap, BTreeSet, VecDeque};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{edge, Edge, Graph, Vertex};
use crate::formula::Qbf;

/// A BFS spanning forest plus the complementary feedback edge set.
#[derive(Clone, Debug)]
pub struct SpanningForest {
    pub parent: BTreeMap<Vertex, Option<Vertex>>,
    pub tree_edges: Vec<Edge>,
    pub feedback_edges: Vec<Edge>,
}

/// BFS from the smallest unvisited vertex, neighbours in edge insertion order.
pub fn spanning_forest(g: &Graph) -> SpanningForest {
    let mut parent: BTreeMap<Vertex, Option<Vertex>> = BTreeMap::new();
    let mut tree: BTreeSet<Edge> = BTreeSet::new();
    for root in g.vertices() {
        if parent.contains_key(&root) {
            continue;
        }
        parent.insert(root, None);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if let std::collections::btree_map::Entry::Vacant(slot) = parent.entry(w) {
                    slot.insert(Some(u));
                    tree.insert(edge(u, w));
                    queue.push_back(w);
                }
            }
        }
    }
    let (tree_edges, feedback_edges) = g.edges().iter().partition(|e| tree.contains(e));
    SpanningForest {
        parent,
        tree_edges,
        feedback_edges,
    }
}

/// A minimum feedback edge set: the complement of a spanning forest.
pub fn min_fes(g: &Graph) -> Vec<Edge> {
    spanning_forest(g).feedback_edges
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeletionKind {
    Fvs,
    /// FVS whose remaining vertex pairs share at most one clause or term.
    SparseFvs,
    /// Every component of `G − S` has at most this many vertices.
    CDeletion(usize),
    VertexCover,
}

/// Sparsity of a variable set: outside it, no two variables share two or more clauses/terms.
pub fn is_sparse(q: &Qbf, set: &BTreeSet<Vertex>) -> bool {
    let mut shared: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for s in q.matrix.sets() {
        let vars: Vec<u32> = s
            .iter()
            .map(|l| l.var())
            .filter(|&v| !set.contains(&Vertex::Var(v)))
            .sorted()
            .collect();
        for (a, b) in vars.iter().tuple_combinations() {
            let count = shared.entry((*a, *b)).or_default();
            *count += 1;
            if *count > 1 {
                return false;
            }
        }
    }
    true
}

/// Check a deletion set. Sparse FVS checks need the formula; without one they fail.
pub fn is_deletion_set(
    g: &Graph,
    q: Option<&Qbf>,
    kind: DeletionKind,
    set: &BTreeSet<Vertex>,
) -> bool {
    let rest = g.without_vertices(set);
    match kind {
        DeletionKind::Fvs => rest.is_acyclic(),
        DeletionKind::SparseFvs => rest.is_acyclic() && q.is_some_and(|q| is_sparse(q, set)),
        DeletionKind::CDeletion(c) => rest.components().iter().all(|comp| comp.len() <= c),
        DeletionKind::VertexCover => rest.edge_count() == 0,
    }
}

/// Smallest deletion set of size at most `k`, by exhaustive search over subsets in
/// increasing size (lexicographic within a size).
pub fn min_deletion_set(
    g: &Graph,
    q: Option<&Qbf>,
    kind: DeletionKind,
    k: usize,
) -> Option<BTreeSet<Vertex>> {
    let verts: Vec<Vertex> = g.vertices().collect();
    (0..=k.min(verts.len())).find_map(|size| {
        verts
            .iter()
            .copied()
            .combinations(size)
            .map(|c| c.into_iter().collect::<BTreeSet<_>>())
            .find(|s| is_deletion_set(g, q, kind, s))
    })
}

/// All inclusion-minimal `c`-deletion sets of size at most `k`.
pub fn enumerate_c_deletion_sets(g: &Graph, c: usize, k: usize) -> Vec<BTreeSet<Vertex>> {
    let kind = DeletionKind::CDeletion(c);
    let verts: Vec<Vertex> = g.vertices().collect();
    let mut out: Vec<BTreeSet<Vertex>> = Vec::new();
    for size in 0..=k.min(verts.len()) {
        for cand in verts.iter().copied().combinations(size) {
            let set: BTreeSet<Vertex> = cand.into_iter().collect();
            // The property is monotone, so checking against smaller hits suffices.
            if out.iter().any(|m| m.is_subset(&set)) {
                continue;
            }
            if is_deletion_set(g, None, kind, &set) {
                out.push(set);
            }
        }
    }
    out
}
