use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Graph, Vertex};
use crate::formula::Var;

/// Outcome of a decomposition check: validity, width or height, and every violation found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub valid: bool,
    /// Width for tree decompositions, height for treedepth decompositions.
    pub measure: usize,
    pub violations: Vec<String>,
}

impl Report {
    fn new(measure: usize, violations: Vec<String>) -> Report {
        Report {
            valid: violations.is_empty(),
            measure,
            violations,
        }
    }
}

/// A tree decomposition: node `i` has bag `bags[i]` and parent `parent[i]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<Vertex>>,
    pub parent: Vec<Option<usize>>,
}

impl TreeDecomposition {
    /// A path of bags, the first one being the root.
    pub fn path(bags: Vec<BTreeSet<Vertex>>) -> Self {
        let parent = (0..bags.len()).map(|i| i.checked_sub(1)).collect();
        TreeDecomposition { bags, parent }
    }

    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(BTreeSet::len)
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(Option::is_none)
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.parent.len())
            .filter(|&c| self.parent[c] == Some(node))
            .collect()
    }

    /// Indented parent-child text, one bag per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(root) = self.root() {
            self.write_node(root, 0, &mut out);
        }
        out
    }

    fn write_node(&self, node: usize, depth: usize, out: &mut String) {
        let bag: Vec<String> = self.bags[node].iter().map(ToString::to_string).collect();
        out.push_str(&format!(
            "{}{}: {{{}}}\n",
            "  ".repeat(depth),
            node,
            bag.join(",")
        ));
        for c in self.children(node) {
            self.write_node(c, depth + 1, out);
        }
    }
}

/// A rooted forest given by parent links.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreedepthDecomposition {
    pub parent: BTreeMap<Vertex, Option<Vertex>>,
}

impl TreedepthDecomposition {
    pub fn set_parent(&mut self, v: Vertex, parent: Option<Vertex>) {
        self.parent.insert(v, parent);
    }

    /// Ancestors of `v`, nearest first. Stops on a cycle.
    pub fn ancestors(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut cur = v;
        while let Some(Some(p)) = self.parent.get(&cur) {
            if *p == v || out.contains(p) {
                break;
            }
            out.push(*p);
            cur = *p;
        }
        out
    }

    /// Number of vertices on a longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.parent
            .keys()
            .map(|&v| self.ancestors(v).len() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn is_ancestor(&self, a: Vertex, v: Vertex) -> bool {
        self.ancestors(v).contains(&a)
    }

    pub fn to_text(&self) -> String {
        let mut children: BTreeMap<Option<Vertex>, Vec<Vertex>> = BTreeMap::new();
        for (&v, &p) in &self.parent {
            children.entry(p).or_default().push(v);
        }
        let mut out = String::new();
        let mut stack: Vec<(Vertex, usize)> = children
            .get(&None)
            .into_iter()
            .flatten()
            .rev()
            .map(|&v| (v, 0))
            .collect();
        while let Some((v, depth)) = stack.pop() {
            out.push_str(&format!("{}{}\n", "  ".repeat(depth), v));
            if let Some(cs) = children.get(&Some(v)) {
                stack.extend(cs.iter().rev().map(|&c| (c, depth + 1)));
            }
        }
        out
    }
}

/// A treedepth decomposition shaped as a main path with bounded-height trees
/// hanging off it and a path hanging below selected leaves of those trees.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaTd {
    /// Main path, root first.
    pub main_path: Vec<Var>,
    /// Parent of every hung-tree vertex: a main-path vertex or another hung-tree vertex.
    pub tree_parent: BTreeMap<Var, Var>,
    /// `(r, P_r)`: the path `P_r`, top first, hangs below the hung-tree leaf `r`.
    pub leaf_paths: Vec<(Var, Vec<Var>)>,
}

impl AlphaTd {
    /// The plain treedepth decomposition this structure describes.
    pub fn to_treedepth(&self) -> TreedepthDecomposition {
        let mut td = TreedepthDecomposition::default();
        let mut prev = None;
        for &s in &self.main_path {
            td.set_parent(Vertex::Var(s), prev);
            prev = Some(Vertex::Var(s));
        }
        for (&v, &p) in &self.tree_parent {
            td.set_parent(Vertex::Var(v), Some(Vertex::Var(p)));
        }
        for (r, path) in &self.leaf_paths {
            let mut prev = Vertex::Var(*r);
            for &x in path {
                td.set_parent(Vertex::Var(x), Some(prev));
                prev = Vertex::Var(x);
            }
        }
        td
    }

    pub fn path_vars(&self) -> BTreeSet<Var> {
        self.leaf_paths
            .iter()
            .flat_map(|(_, p)| p.iter().copied())
            .collect()
    }

    /// Height of the hung tree containing `v`, counted in vertices from its top.
    fn tree_depth_of(&self, v: Var) -> usize {
        let mut depth = 1;
        let mut cur = v;
        while let Some(&p) = self.tree_parent.get(&cur) {
            if !self.tree_parent.contains_key(&p) {
                break;
            }
            depth += 1;
            cur = p;
            if depth > self.tree_parent.len() {
                break;
            }
        }
        depth
    }

    pub fn hung_height(&self) -> usize {
        self.tree_parent
            .keys()
            .map(|&v| self.tree_depth_of(v))
            .max()
            .unwrap_or(0)
    }
}

/// Check the tree decomposition conditions and compute the width.
pub fn validate_td(g: &Graph, td: &TreeDecomposition) -> Report {
    let mut violations = Vec::new();
    let n = td.bags.len();
    if td.parent.len() != n {
        violations.push("bag and parent lists differ in length".to_string());
        return Report::new(td.width(), violations);
    }
    let roots: Vec<usize> = (0..n).filter(|&i| td.parent[i].is_none()).collect();
    if n > 0 && roots.len() != 1 {
        violations.push(format!("expected exactly one root, found {}", roots.len()));
    }
    for i in 0..n {
        let mut seen = BTreeSet::from([i]);
        let mut cur = i;
        while let Some(p) = td.parent[cur] {
            if p >= n || !seen.insert(p) {
                violations.push(format!("node {i} does not reach a root"));
                return Report::new(td.width(), violations);
            }
            cur = p;
        }
    }
    for v in g.vertices() {
        if !td.bags.iter().any(|b| b.contains(&v)) {
            violations.push(format!("vertex {v} is in no bag"));
        }
    }
    for &(u, v) in g.edges() {
        if !td.bags.iter().any(|b| b.contains(&u) && b.contains(&v)) {
            violations.push(format!("edge {u}-{v} is in no bag"));
        }
    }
    // The nodes holding a vertex must be connected: exactly one of them has a
    // parent outside the set.
    let all: BTreeSet<Vertex> = td.bags.iter().flatten().copied().collect();
    for v in all {
        let holders: Vec<usize> = (0..n).filter(|&i| td.bags[i].contains(&v)).collect();
        let tops = holders
            .iter()
            .filter(|&&i| td.parent[i].is_none_or(|p| !td.bags[p].contains(&v)))
            .count();
        if tops != 1 {
            violations.push(format!("bags containing {v} are not connected"));
        }
    }
    Report::new(td.width(), violations)
}

/// Check that every graph edge joins an ancestor-descendant pair and compute the height.
pub fn validate_treedepth(g: &Graph, td: &TreedepthDecomposition) -> Report {
    let mut violations = Vec::new();
    for (&v, p) in &td.parent {
        if let Some(p) = p {
            if !td.parent.contains_key(p) {
                violations.push(format!("parent {p} of {v} is not a vertex of the forest"));
            }
        }
        let anc = td.ancestors(v);
        let reaches_root = anc.last().map_or(td.parent[&v].is_none(), |a| {
            matches!(td.parent.get(a), Some(None))
        });
        if !reaches_root {
            violations.push(format!("{v} lies on a cycle of parent links"));
        }
    }
    if !violations.is_empty() {
        return Report::new(0, violations);
    }
    for v in g.vertices() {
        if !td.parent.contains_key(&v) {
            violations.push(format!("vertex {v} missing from the forest"));
        }
    }
    for &(u, v) in g.edges() {
        if !td.is_ancestor(u, v) && !td.is_ancestor(v, u) {
            violations.push(format!("edge {u}-{v} joins incomparable vertices"));
        }
    }
    Report::new(td.height(), violations)
}

/// Check the main-path/hung-tree/leaf-path shape with hung-tree height at most `alpha`,
/// and that the union is a treedepth decomposition of `g`.
pub fn validate_alpha_td(g: &Graph, t: &AlphaTd, alpha: usize) -> Report {
    let mut violations = Vec::new();
    let main: BTreeSet<Var> = t.main_path.iter().copied().collect();
    if main.len() != t.main_path.len() {
        violations.push("main path repeats a vertex".to_string());
    }
    for (&v, &p) in &t.tree_parent {
        if main.contains(&v) {
            violations.push(format!("hung-tree vertex x{v} is also on the main path"));
        }
        if !main.contains(&p) && !t.tree_parent.contains_key(&p) {
            violations.push(format!("parent x{p} of hung-tree vertex x{v} is unknown"));
        }
    }
    if t.hung_height() > alpha {
        violations.push(format!(
            "hung tree of height {} exceeds {alpha}",
            t.hung_height()
        ));
    }
    let mut on_paths = BTreeSet::new();
    for (r, path) in &t.leaf_paths {
        if !t.tree_parent.contains_key(r) {
            violations.push(format!("path anchor x{r} is not a hung-tree vertex"));
        } else if t.tree_parent.values().any(|p| p == r) {
            violations.push(format!("path anchor x{r} is not a leaf of its hung tree"));
        }
        if path.len() > t.main_path.len() {
            violations.push(format!("path below x{r} is longer than the main path"));
        }
        for &x in path {
            if main.contains(&x) || t.tree_parent.contains_key(&x) || !on_paths.insert(x) {
                violations.push(format!("path vertex x{x} is used twice"));
            }
        }
    }
    let anchors: BTreeSet<Var> = t.leaf_paths.iter().map(|p| p.0).collect();
    if anchors.len() != t.leaf_paths.len() {
        violations.push("a leaf carries two paths".to_string());
    }
    let td = t.to_treedepth();
    let inner = validate_treedepth(g, &td);
    violations.extend(inner.violations);
    for v in td.parent.keys() {
        if !g.contains(*v) {
            violations.push(format!("{v} is not a graph vertex"));
        }
    }
    Report::new(inner.measure, violations)
}

/// Any of the supported decomposition shapes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decomposition {
    Tree(TreeDecomposition),
    Treedepth(TreedepthDecomposition),
    Alpha { td: AlphaTd, alpha: usize },
}

pub fn validate_decomposition(g: &Graph, d: &Decomposition) -> Report {
    match d {
        Decomposition::Tree(td) => validate_td(g, td),
        Decomposition::Treedepth(td) => validate_treedepth(g, td),
        Decomposition::Alpha { td, alpha } => validate_alpha_td(g, td, *alpha),
    }
}

/// A tree decomposition from the greedy minimum-degree elimination order.
///
/// Eliminating `v` creates the bag `{v} ∪ N(v)` and turns `N(v)` into a clique; the
/// bag's parent is the bag of the neighbour eliminated next. Component roots are
/// chained so the result is a single tree.
pub fn min_degree_decomposition(g: &Graph) -> TreeDecomposition {
    let mut adj: BTreeMap<Vertex, BTreeSet<Vertex>> = g
        .vertices()
        .map(|v| (v, g.neighbors(v).iter().copied().collect()))
        .collect();
    let mut order: Vec<Vertex> = Vec::new();
    let mut bags: Vec<BTreeSet<Vertex>> = Vec::new();
    while let Some((&v, _)) = adj.iter().min_by_key(|(v, n)| (n.len(), **v)) {
        let nbrs = adj.remove(&v).unwrap_or_default();
        for &a in &nbrs {
            let set = adj.get_mut(&a).expect("neighbour still present");
            set.remove(&v);
            set.extend(nbrs.iter().copied().filter(|&b| b != a));
        }
        let mut bag = nbrs;
        bag.insert(v);
        order.push(v);
        bags.push(bag);
    }
    let position: BTreeMap<Vertex, usize> =
        order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<Option<usize>> = (0..bags.len())
        .map(|i| {
            bags[i]
                .iter()
                .filter(|&&u| u != order[i])
                .map(|u| position[u])
                .min()
        })
        .collect();
    let roots: Vec<usize> = (0..bags.len()).filter(|&i| parent[i].is_none()).collect();
    for pair in roots.windows(2) {
        parent[pair[0]] = Some(pair[1]);
    }
    TreeDecomposition { bags, parent }
}
