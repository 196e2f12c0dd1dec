use std::collections::BTreeSet;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::formula::{has_complementary, Clause, Lit, Matrix, Orientation, Qbf, Quant, Var};
use crate::graphs::{build_graph, validate_td, GraphKind, TreeDecomposition, Vertex};

/// Give every node at most two children by inserting copies of the parent bag.
fn binarize(td: &TreeDecomposition) -> TreeDecomposition {
    let mut out = td.clone();
    for node in 0..td.bags.len() {
        let children = out.children(node);
        if children.len() <= 2 {
            continue;
        }
        let mut holder = node;
        for (i, &child) in children.iter().enumerate().skip(1) {
            if i + 1 == children.len() {
                out.parent[child] = Some(holder);
            } else {
                out.bags.push(td.bags[node].clone());
                out.parent.push(Some(holder));
                let copy = out.bags.len() - 1;
                out.parent[child] = Some(copy);
                holder = copy;
            }
        }
    }
    out
}

/// Encode a CDNF with innermost ∃ as a CNF along a tree decomposition of its primal graph.
///
/// Each node `t` gets a switch `sat_t` in the innermost block, with
/// `sat_t → ⋁ sat_children ∨ ⋁ {d ∈ D : var(d) ⊆ χ(t)}` expanded by distribution,
/// and the root switch is asserted. The returned decomposition adds to each bag its
/// own switch and those of its (at most two) children.
pub fn cdnf_to_cnf_via_td(q: &Qbf, td: &TreeDecomposition) -> Result<(Qbf, TreeDecomposition)> {
    if q.innermost() == Some(Quant::Forall) {
        return Err(Error::pre(
            "the CNF encoding needs an existential innermost block",
        ));
    }
    let g = build_graph(q, GraphKind::Primal);
    let report = validate_td(&g, td);
    if !report.valid {
        return Err(Error::pre(format!(
            "invalid tree decomposition: {}",
            report.violations.join("; ")
        )));
    }
    let (c, d) = split_cnf_dnf_any(q)?;
    let mut tree = if td.bags.is_empty() {
        TreeDecomposition::path(vec![BTreeSet::new()])
    } else {
        binarize(td)
    };

    let mut out = Qbf {
        num_vars: q.num_vars,
        prefix: q.prefix.clone(),
        matrix: Matrix::Cnf(vec![]),
    };
    let switches: Vec<Var> = (0..tree.bags.len()).map(|_| out.fresh_var()).collect();
    out.prefix
        .extend(switches.iter().map(|&s| (Quant::Exists, s)));

    let mut clauses: Vec<Clause> = c;
    for node in 0..tree.bags.len() {
        let bag = &tree.bags[node];
        let mut base = vec![Lit::neg(switches[node])];
        base.extend(
            tree.children(node)
                .into_iter()
                .map(|ch| Lit::pos(switches[ch])),
        );
        let local: Vec<&Clause> = d
            .iter()
            .filter(|t| t.iter().all(|l| bag.contains(&Vertex::Var(l.var()))))
            .collect();
        if local.iter().any(|t| t.is_empty()) {
            continue;
        }
        for pick in local.iter().map(|t| t.iter()).multi_cartesian_product() {
            let mut clause = base.clone();
            for &l in pick {
                if !clause.contains(&l) {
                    clause.push(l);
                }
            }
            if !has_complementary(&clause) {
                clauses.push(clause);
            }
        }
        if local.is_empty() {
            clauses.push(base);
        }
    }
    let root = tree.root().expect("a nonempty tree has a root");
    clauses.push(vec![Lit::pos(switches[root])]);
    out.matrix = Matrix::Cnf(clauses);
    out.validate()?;

    for node in 0..tree.bags.len() {
        let mut extra = vec![Vertex::Var(switches[node])];
        extra.extend(
            tree.children(node)
                .into_iter()
                .map(|ch| Vertex::Var(switches[ch])),
        );
        tree.bags[node].extend(extra);
    }
    Ok((out, tree))
}

/// The clause and term parts, with any term width allowed.
fn split_cnf_dnf_any(q: &Qbf) -> Result<(Vec<Clause>, Vec<Clause>)> {
    match &q.matrix {
        Matrix::Cnf(c) => Ok((c.clone(), vec![vec![]])),
        Matrix::Dnf(d) => Ok((vec![], d.clone())),
        Matrix::Cdnf {
            cnf,
            dnf,
            orientation: Orientation::CnfAndDnf,
        } => Ok((cnf.clone(), dnf.clone())),
        Matrix::Cdnf { .. } => Err(Error::pre(
            "matrix orientation does not match the innermost quantifier",
        )),
    }
}

/// Merge the singleton side of a `d,1`-CDNF into one long clause (innermost ∃) or
/// one long term (innermost ∀), giving a pure CNF or DNF.
pub fn fold_1dnf_into_clause(q: &Qbf) -> Result<Qbf> {
    let Matrix::Cdnf {
        cnf,
        dnf,
        orientation,
    } = &q.matrix
    else {
        return Err(Error::pre(
            "folding needs a formula with both a CNF and a DNF part",
        ));
    };
    let existential = *orientation == Orientation::CnfAndDnf;
    let (long_side, singletons) = if existential { (cnf, dnf) } else { (dnf, cnf) };
    if singletons.iter().any(|s| s.len() != 1) {
        return Err(Error::pre(
            "the side to fold must consist of singletons only",
        ));
    }
    let folded: Vec<Lit> = singletons.iter().map(|s| s[0]).unique().collect();
    let mut sets = long_side.clone();
    // A complementary pair makes the folded side constant true (∃) or false (∀),
    // which leaves the other side unchanged.
    if !has_complementary(&folded) {
        sets.push(folded);
    }
    let matrix = if existential {
        Matrix::Cnf(sets)
    } else {
        Matrix::Dnf(sets)
    };
    Qbf::new(q.num_vars, q.prefix.clone(), matrix)
}
