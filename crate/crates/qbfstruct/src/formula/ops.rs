use std::collections::{BTreeMap, BTreeSet};

use super::{has_complementary, Assignment, Clause, Lit, Matrix, Qbf, Quant, Term, Var};
use crate::error::{Error, Result};

fn restrict_cnf(clauses: &[Clause], a: &Assignment) -> Vec<Clause> {
    clauses
        .iter()
        .filter(|c| !c.iter().any(|l| a.get(l.var()).is_some_and(|v| l.eval(v))))
        .map(|c| c.iter().copied().filter(|l| !a.contains(l.var())).collect())
        .collect()
}

fn restrict_dnf(terms: &[Term], a: &Assignment) -> Vec<Term> {
    terms
        .iter()
        .filter(|t| !t.iter().any(|l| a.get(l.var()).is_some_and(|v| !l.eval(v))))
        .map(|t| t.iter().copied().filter(|l| !a.contains(l.var())).collect())
        .collect()
}

/// `Q[α]`: assigned variables leave the prefix; satisfied clauses and falsified
/// terms disappear; decided literals are deleted from the rest.
pub fn restrict(q: &Qbf, a: &Assignment) -> Qbf {
    let matrix = match &q.matrix {
        Matrix::Cnf(c) => Matrix::Cnf(restrict_cnf(c, a)),
        Matrix::Dnf(d) => Matrix::Dnf(restrict_dnf(d, a)),
        Matrix::Cdnf {
            cnf,
            dnf,
            orientation,
        } => Matrix::Cdnf {
            cnf: restrict_cnf(cnf, a),
            dnf: restrict_dnf(dnf, a),
            orientation: *orientation,
        },
    };
    Qbf {
        num_vars: q.num_vars,
        prefix: q
            .prefix
            .iter()
            .copied()
            .filter(|(_, v)| !a.contains(*v))
            .collect(),
        matrix,
    }
}

fn flip_sets(sets: &[Vec<Lit>]) -> Vec<Vec<Lit>> {
    sets.iter()
        .map(|s| s.iter().map(|&l| !l).collect())
        .collect()
}

/// The dual formula: quantifiers flipped, CNF and DNF exchanged with literals negated.
pub fn negate(q: &Qbf) -> Qbf {
    let matrix = match &q.matrix {
        Matrix::Cnf(c) => Matrix::Dnf(flip_sets(c)),
        Matrix::Dnf(d) => Matrix::Cnf(flip_sets(d)),
        Matrix::Cdnf {
            cnf,
            dnf,
            orientation,
        } => Matrix::Cdnf {
            cnf: flip_sets(dnf),
            dnf: flip_sets(cnf),
            orientation: orientation.flip(),
        },
    };
    Qbf {
        num_vars: q.num_vars,
        prefix: q.prefix.iter().map(|&(k, v)| (k.flip(), v)).collect(),
        matrix,
    }
}

/// Eliminate the innermost variable of a CNF formula: universal reduction for a
/// universal, DP resolution for an existential.
pub fn eliminate_innermost(q: &Qbf, v: Var) -> Result<Qbf> {
    let Matrix::Cnf(clauses) = &q.matrix else {
        return Err(Error::pre("elimination needs a CNF matrix"));
    };
    let Some(&(quant, last)) = q.prefix.last() else {
        return Err(Error::pre("empty prefix"));
    };
    if last != v {
        return Err(Error::pre(format!("variable {v} is not innermost")));
    }
    let new_clauses = match quant {
        Quant::Forall => clauses
            .iter()
            .map(|c| c.iter().copied().filter(|l| l.var() != v).collect())
            .collect(),
        Quant::Exists => {
            let (with, without): (Vec<&Clause>, Vec<&Clause>) =
                clauses.iter().partition(|c| c.iter().any(|l| l.var() == v));
            let pos: Vec<&Clause> = with
                .iter()
                .copied()
                .filter(|c| c.contains(&Lit::pos(v)))
                .collect();
            let neg: Vec<&Clause> = with
                .iter()
                .copied()
                .filter(|c| c.contains(&Lit::neg(v)))
                .collect();
            let mut out: Vec<Clause> = without.into_iter().cloned().collect();
            for p in &pos {
                for n in &neg {
                    let mut r: Clause = Vec::new();
                    for &l in p.iter().chain(n.iter()) {
                        if l.var() != v && !r.contains(&l) {
                            r.push(l);
                        }
                    }
                    if !has_complementary(&r) {
                        out.push(r);
                    }
                }
            }
            out
        }
    };
    Ok(Qbf {
        num_vars: q.num_vars,
        prefix: q.prefix[..q.prefix.len() - 1].to_vec(),
        matrix: Matrix::Cnf(new_clauses),
    })
}

/// `Q|_A`: keep the variables of `keep` and only the clauses/terms entirely inside it.
pub fn induced(q: &Qbf, keep: &BTreeSet<Var>) -> Qbf {
    let inside = |s: &&Vec<Lit>| s.iter().all(|l| keep.contains(&l.var()));
    let filter = |sets: &[Vec<Lit>]| sets.iter().filter(inside).cloned().collect::<Vec<_>>();
    let matrix = match &q.matrix {
        Matrix::Cnf(c) => Matrix::Cnf(filter(c)),
        Matrix::Dnf(d) => Matrix::Dnf(filter(d)),
        Matrix::Cdnf {
            cnf,
            dnf,
            orientation,
        } => Matrix::Cdnf {
            cnf: filter(cnf),
            dnf: filter(dnf),
            orientation: *orientation,
        },
    };
    Qbf {
        num_vars: q.num_vars,
        prefix: q
            .prefix
            .iter()
            .copied()
            .filter(|(_, v)| keep.contains(v))
            .collect(),
        matrix,
    }
}

/// Replace variables by literals (`v ↦ l` maps `v` to `l` and `¬v` to `¬l`).
///
/// Substituted variables leave the prefix. Clauses that become tautologies and
/// terms that become contradictions are dropped; repeated literals merge.
pub fn substitute(q: &Qbf, map: &BTreeMap<Var, Lit>) -> Qbf {
    let apply = |s: &Vec<Lit>| -> Option<Vec<Lit>> {
        let mut out: Vec<Lit> = Vec::with_capacity(s.len());
        for &l in s {
            let m = match map.get(&l.var()) {
                Some(&t) if l.is_positive() => t,
                Some(&t) => !t,
                None => l,
            };
            if !out.contains(&m) {
                out.push(m);
            }
        }
        (!has_complementary(&out)).then_some(out)
    };
    let sub = |sets: &[Vec<Lit>]| sets.iter().filter_map(apply).collect::<Vec<_>>();
    let matrix = match &q.matrix {
        Matrix::Cnf(c) => Matrix::Cnf(sub(c)),
        Matrix::Dnf(d) => Matrix::Dnf(sub(d)),
        Matrix::Cdnf {
            cnf,
            dnf,
            orientation,
        } => Matrix::Cdnf {
            cnf: sub(cnf),
            dnf: sub(dnf),
            orientation: *orientation,
        },
    };
    Qbf {
        num_vars: q.num_vars,
        prefix: q
            .prefix
            .iter()
            .copied()
            .filter(|(_, v)| !map.contains_key(v))
            .collect(),
        matrix,
    }
}
