use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::fvs::{assemble, sorted_positions, Emitter, Family};
use super::{
    binary_code, bits_for, split_cnf_dnf, with_existential_innermost, Fresh, IndexCode, IndexMode,
    SawPlan, TermGroup,
};
use crate::error::{Error, Result};
use crate::formula::{Lit, Qbf, Var};
use crate::graphs::{
    build_graph, validate_alpha_td, validate_treedepth, AlphaTd, GraphKind, TreedepthDecomposition,
    Vertex,
};

/// A path hanging below a hung-tree leaf, with its selector variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSelector {
    pub anchor: Var,
    pub selector: Var,
    pub path: Vec<Var>,
}

/// The sparse-FVS plan for the main path plus the path-level index machinery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdSawPlan {
    pub base: SawPlan,
    pub path_bits: usize,
    pub path_idx: Vec<Vec<Var>>,
    pub path_val: Vec<Var>,
    pub selectors: Vec<PathSelector>,
    /// Codes of path variables, unique within each path.
    pub path_codes: Vec<IndexCode>,
    /// Height of the constructed decomposition.
    pub height: usize,
}

impl TdSawPlan {
    /// Height bound `7·⌈log₂ h⌉ + α + 9` for a main path of `h` vertices and hung trees
    /// of height `α`, before 3-DNF normalization. The constants follow from the
    /// construction: the chain over S' has at most `6⌈log₂ h⌉ + 7` vertices, and
    /// below it sit a hung tree, a selector, a path variable and a switch.
    pub fn height_bound(h: usize, alpha: usize) -> usize {
        7 * bits_for(h) + alpha + 9
    }
}

/// The treedepth variant of the sparse-FVS reduction: main-path variables are
/// indexed as before, and each path below a hung-tree leaf is indexed through a
/// shared second set of index variables switched on by its selector.
///
/// Requires an α-treedepth decomposition of the primal graph with α the
/// quantifier depth. Returns the formula, a treedepth decomposition of its primal
/// graph and the plan.
pub fn saw_reduce_treedepth(
    q: &Qbf,
    t: &AlphaTd,
) -> Result<(Qbf, TreedepthDecomposition, TdSawPlan)> {
    let g = build_graph(q, GraphKind::Primal);
    let report = validate_alpha_td(&g, t, q.depth());
    if !report.valid {
        return Err(Error::pre(format!(
            "invalid decomposition: {}",
            report.violations.join("; ")
        )));
    }
    let (out, (td, mut plan), negated) = with_existential_innermost(q, |q| reduce(q, t))?;
    plan.base.negated = negated;
    let check = validate_treedepth(&build_graph(&out, GraphKind::Primal), &td);
    if !check.valid {
        return Err(Error::pre(format!(
            "constructed decomposition is invalid: {}",
            check.violations.join("; ")
        )));
    }
    plan.height = check.measure;
    Ok((out, td, plan))
}

fn reduce(q: &Qbf, t: &AlphaTd) -> Result<(Qbf, (TreedepthDecomposition, TdSawPlan))> {
    let (c, d) = split_cnf_dnf(q, Some(3))?;
    let mut source: Vec<Var> = t.main_path.clone();
    source.sort_unstable();
    let paths: Vec<(Var, Vec<Var>)> = t
        .leaf_paths
        .iter()
        .filter(|(_, p)| !p.is_empty())
        .cloned()
        .collect();
    let bits = bits_for(source.len());
    let path_bits = bits_for(paths.iter().map(|(_, p)| p.len()).max().unwrap_or(0));

    let mut fresh = Fresh::above(q.num_vars);
    let idx: Vec<Vec<Var>> = (1..=3)
        .map(|j| {
            (1..=bits)
                .map(|m| fresh.var(format!("idx_{j}^{m}")))
                .collect()
        })
        .collect();
    let val: Vec<Var> = (1..=3).map(|j| fresh.var(format!("val_{j}"))).collect();
    let sat = fresh.var("sat".into());
    let clause_sat: Vec<Var> = (1..=c.len())
        .map(|i| fresh.var(format!("sat_{i}")))
        .collect();
    let (path_idx, path_val, selectors) = if paths.is_empty() {
        (vec![], vec![], vec![])
    } else {
        let path_idx: Vec<Vec<Var>> = (1..=3)
            .map(|j| {
                (1..=path_bits)
                    .map(|m| fresh.var(format!("idxP_{j}^{m}")))
                    .collect()
            })
            .collect();
        let path_val: Vec<Var> = (1..=3).map(|j| fresh.var(format!("valP_{j}"))).collect();
        let selectors: Vec<PathSelector> = paths
            .iter()
            .map(|(r, p)| PathSelector {
                anchor: *r,
                selector: fresh.var(format!("sel_x{r}")),
                path: p.clone(),
            })
            .collect();
        (path_idx, path_val, selectors)
    };

    let mut codes: BTreeMap<(Var, usize), Vec<Lit>> = BTreeMap::new();
    for (rank, &x) in source.iter().enumerate() {
        for j in 1..=3 {
            codes.insert((x, j), binary_code(rank, &idx[j - 1]));
        }
    }
    let mut path_codes: BTreeMap<(Var, usize), Vec<Lit>> = BTreeMap::new();
    let mut selector_of: BTreeMap<Var, Var> = BTreeMap::new();
    for ps in &selectors {
        for (rank, &x) in ps.path.iter().enumerate() {
            selector_of.insert(x, ps.selector);
            for j in 1..=3 {
                path_codes.insert((x, j), binary_code(rank, &path_idx[j - 1]));
            }
        }
    }
    let positions = sorted_positions(&c);

    let no_selector = |_: Var| None;
    let main = Family {
        codes: &codes,
        val: &val,
        selector: &no_selector,
        groups: [
            TermGroup::GuessTrue,
            TermGroup::GuessFalse,
            TermGroup::IndexMiss,
            TermGroup::ValueTrue,
            TermGroup::ValueFalse,
        ],
    };
    let path_selector = |x: Var| selector_of.get(&x).copied();
    let along_paths = Family {
        codes: &path_codes,
        val: &path_val,
        selector: &path_selector,
        groups: [
            TermGroup::PathGuessTrue,
            TermGroup::PathGuessFalse,
            TermGroup::PathIndexMiss,
            TermGroup::PathValueTrue,
            TermGroup::PathValueFalse,
        ],
    };
    let mut emit = Emitter::default();
    emit.guesses(&main);
    emit.plain_literals(&positions, &clause_sat, &|v| {
        source.contains(&v) || selector_of.contains_key(&v)
    });
    emit.clause_checks(&main, &positions, &clause_sat);
    emit.dnf_terms(&d, sat);
    emit.guesses(&along_paths);
    emit.clause_checks(&along_paths, &positions, &clause_sat);
    let touching = |i: usize| -> Option<&PathSelector> {
        selectors
            .iter()
            .find(|ps| c[i].iter().any(|l| ps.path.contains(&l.var())))
    };
    for (i, &s) in clause_sat.iter().enumerate() {
        if let Some(ps) = touching(i) {
            emit.terms.push(vec![Lit::pos(s), Lit::neg(ps.selector)]);
            emit.groups.push(TermGroup::PathSelector);
        }
    }

    let mut switches = clause_sat.clone();
    switches.push(sat);
    let out = assemble(q, &fresh, emit.terms, &switches)?;

    let mut s_prime: Vec<Var> = idx.iter().flatten().copied().collect();
    s_prime.extend(&val);
    s_prime.push(sat);
    s_prime.extend(path_idx.iter().flatten());
    s_prime.extend(&path_val);

    // The decomposition: S' as a chain, then S and the hung trees below its last
    // vertex, selectors below their anchors with the path variables as children,
    // and each clause switch below the deepest variable it must see.
    let var = Vertex::Var;
    let mut td = TreedepthDecomposition::default();
    let mut prev = None;
    for &s in &s_prime {
        td.set_parent(var(s), prev);
        prev = Some(var(s));
    }
    let last = prev;
    let main_set: BTreeSet<Var> = source.iter().copied().collect();
    for &x in &source {
        td.set_parent(var(x), last);
    }
    for (&v, &p) in &t.tree_parent {
        let parent = if main_set.contains(&p) {
            last
        } else {
            Some(var(p))
        };
        td.set_parent(var(v), parent);
    }
    for ps in &selectors {
        td.set_parent(var(ps.selector), Some(var(ps.anchor)));
        for &x in &ps.path {
            td.set_parent(var(x), Some(var(ps.selector)));
        }
    }
    for (i, &s) in clause_sat.iter().enumerate() {
        let parent = if let Some(ps) = touching(i) {
            Some(var(ps.selector))
        } else {
            c[i].iter()
                .map(|l| l.var())
                .filter(|v| !main_set.contains(v))
                .max_by_key(|&v| td.ancestors(var(v)).len())
                .map(var)
                .or(last)
        };
        td.set_parent(var(s), parent);
    }

    let base = SawPlan {
        mode: IndexMode::Standard,
        source,
        bits,
        idx,
        val,
        sat,
        clause_sat,
        codes: to_codes(codes),
        positions,
        s_prime,
        term_groups: emit.groups,
        names: fresh.names,
        negated: false,
    };
    let plan = TdSawPlan {
        base,
        path_bits,
        path_idx,
        path_val,
        selectors,
        path_codes: to_codes(path_codes),
        height: 0,
    };
    Ok((out, (td, plan)))
}

fn to_codes(codes: BTreeMap<(Var, usize), Vec<Lit>>) -> Vec<IndexCode> {
    codes
        .into_iter()
        .map(|((var, index), literals)| IndexCode {
            var,
            index,
            literals,
        })
        .collect()
}
