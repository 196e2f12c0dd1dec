use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formula::{negate, Lit, Matrix, Qbf, Quant, Term, Var};
use crate::graphs::{TreedepthDecomposition, Vertex};

/// Auxiliary variables that replaced one wide term, first to last.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitChain {
    /// Variable of the term's first literal.
    pub anchor: Var,
    pub aux: Vec<Var>,
}

/// Split every term wider than three literals into a chain of 3-literal terms
/// linked by fresh universal variables added to the innermost block.
///
/// `l₁∧…∧l_w` becomes `l₁∧l₂∧v₁`, `¬v₁∧l₃∧v₂`, …, `¬v_k∧l_{w−1}∧l_w` with `k = w − 3`,
/// so the first literal shares a term with one auxiliary only. Formulas whose
/// innermost block is existential get the dual treatment on their clauses.
pub fn normalize_3dnf(q: &Qbf) -> Result<(Qbf, Vec<SplitChain>)> {
    if q.innermost() == Some(Quant::Exists) {
        let (out, chains) = split_terms(&negate(q))?;
        return Ok((negate(&out), chains));
    }
    split_terms(q)
}

fn split_terms(q: &Qbf) -> Result<(Qbf, Vec<SplitChain>)> {
    let mut out = q.clone();
    let terms: Vec<Term> = q.terms().to_vec();
    let mut chains = Vec::new();
    let mut new_terms = Vec::with_capacity(terms.len());
    for t in terms {
        if t.len() <= 3 {
            new_terms.push(t);
            continue;
        }
        let aux: Vec<Var> = (0..t.len() - 3).map(|_| out.fresh_var()).collect();
        new_terms.push(vec![t[0], t[1], Lit::pos(aux[0])]);
        for i in 1..aux.len() {
            new_terms.push(vec![Lit::neg(aux[i - 1]), t[i + 1], Lit::pos(aux[i])]);
        }
        let n = t.len();
        new_terms.push(vec![
            Lit::neg(*aux.last().expect("nonempty")),
            t[n - 2],
            t[n - 1],
        ]);
        out.prefix.extend(aux.iter().map(|&v| (Quant::Forall, v)));
        chains.push(SplitChain {
            anchor: t[0].var(),
            aux,
        });
    }
    out.matrix = match out.matrix {
        Matrix::Dnf(_) => Matrix::Dnf(new_terms),
        Matrix::Cdnf {
            cnf, orientation, ..
        } => Matrix::Cdnf {
            cnf,
            dnf: new_terms,
            orientation,
        },
        cnf @ Matrix::Cnf(_) => cnf,
    };
    out.validate()?;
    Ok((out, chains))
}

/// Hang each chain below its anchor: the first auxiliary becomes a child of the
/// anchor and every further one a child of its predecessor.
pub fn extend_treedepth(
    td: &TreedepthDecomposition,
    chains: &[SplitChain],
) -> TreedepthDecomposition {
    let mut out = td.clone();
    for chain in chains {
        let mut parent = Vertex::Var(chain.anchor);
        for &v in &chain.aux {
            out.set_parent(Vertex::Var(v), Some(parent));
            parent = Vertex::Var(v);
        }
    }
    out
}
