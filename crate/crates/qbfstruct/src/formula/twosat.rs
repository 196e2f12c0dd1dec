use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::{Assignment, Clause, Lit, Term, Var};
use crate::error::{Error, Result};

/// Satisfiability of a 2-CNF via strongly connected components of the implication graph.
///
/// Returns a model over the clause variables, or `None` when unsatisfiable.
pub fn two_sat(clauses: &[Clause]) -> Result<Option<Assignment>> {
    if let Some(c) = clauses.iter().find(|c| c.len() > 2) {
        return Err(Error::pre(format!(
            "clause of width {} in a 2-CNF",
            c.len()
        )));
    }
    if clauses.iter().any(Vec::is_empty) {
        return Ok(None);
    }
    let vars: Vec<Var> = clauses
        .iter()
        .flatten()
        .map(|l| l.var())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index = |l: Lit| -> u32 {
        let i = vars.binary_search(&l.var()).expect("known variable") as u32;
        2 * i + u32::from(!l.is_positive())
    };
    let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(2 * vars.len(), 2 * clauses.len());
    for _ in 0..2 * vars.len() {
        graph.add_node(());
    }
    for c in clauses {
        let (a, b) = match c.as_slice() {
            [a] => (*a, *a),
            [a, b] => (*a, *b),
            _ => unreachable!(),
        };
        graph.add_edge(index(!a).into(), index(b).into(), ());
        graph.add_edge(index(!b).into(), index(a).into(), ());
    }
    // Tarjan emits components in reverse topological order.
    let mut comp = vec![0usize; 2 * vars.len()];
    for (i, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        for n in scc {
            comp[n.index()] = i;
        }
    }
    let mut model = Assignment::new();
    for (i, &v) in vars.iter().enumerate() {
        let (pos, neg) = (comp[2 * i], comp[2 * i + 1]);
        if pos == neg {
            return Ok(None);
        }
        model.set(v, pos < neg);
    }
    Ok(Some(model))
}

/// Satisfiability of `C ∧ D` with `C` a 2-CNF and `D` a DNF of singleton terms.
///
/// Tries each literal of `D` in turn as an extra unit clause.
pub fn matrix_sat_2cnf_plus_1dnf(cnf: &[Clause], dnf: &[Term]) -> Result<Option<Assignment>> {
    if let Some(t) = dnf.iter().find(|t| t.len() != 1) {
        return Err(Error::pre(format!("term of width {} in a 1-DNF", t.len())));
    }
    if let Some(c) = cnf.iter().find(|c| c.len() > 2) {
        return Err(Error::pre(format!(
            "clause of width {} in a 2-CNF",
            c.len()
        )));
    }
    for t in dnf {
        let lit = t[0];
        let mut with_unit = cnf.to_vec();
        with_unit.push(vec![lit]);
        if let Some(mut model) = two_sat(&with_unit)? {
            model.set(lit.var(), lit.satisfying_value());
            return Ok(Some(model));
        }
    }
    Ok(None)
}
