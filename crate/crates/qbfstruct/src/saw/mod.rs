//! Structure-aware reductions: the sparse-FVS reduction, its treedepth variant,
//! 3-DNF normalization, the tree-decomposition CNF encoding and 1-DNF folding.

mod cnf;
mod fvs;
mod normalize;
mod td;

pub use cnf::{cdnf_to_cnf_via_td, fold_1dnf_into_clause};
pub use fvs::{saw_reduce_fvs, saw_reduce_fvs_with, size_accounting, SIZE_CONSTANT};
pub use normalize::{extend_treedepth, normalize_3dnf, SplitChain};
pub use td::{saw_reduce_treedepth, TdSawPlan};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{negate, Clause, Lit, Matrix, Qbf, Quant, Term, Var};

/// How clause positions are mapped onto index variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexMode {
    /// Three indices of `⌈log₂|S|⌉` bits, positions by variable id.
    #[default]
    Standard,
    /// One index per source variable: index `j` only ever addresses the `j`-th
    /// source variable, which sits at position `j` of every clause containing it.
    /// Other literals follow in variable order.
    Dedicated,
}

/// Which family a generated term or clause belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermGroup {
    /// `x ∧ bval(x,j) ∧ ¬val_j`
    GuessTrue,
    /// `¬x ∧ bval(x,j) ∧ val_j`
    GuessFalse,
    /// `sat_i ∧ l` for a literal outside the indexed sets
    ClauseLiteral,
    /// `sat_i ∧ ¬b`: index `j` does not address the variable at position `j`
    IndexMiss,
    /// `sat_i ∧ val_j` for a positive indexed literal
    ValueTrue,
    /// `sat_i ∧ ¬val_j` for a negative indexed literal
    ValueFalse,
    /// `sat ∧ l` for a singleton term `{l}` of the DNF part
    DnfLiteral,
    PathGuessTrue,
    PathGuessFalse,
    PathIndexMiss,
    PathValueTrue,
    PathValueFalse,
    /// `sat_i ∧ ¬sel_r` for clauses touching the path below `r`
    PathSelector,
}

/// The literal combination over one index that addresses a variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexCode {
    pub var: Var,
    /// Index number, starting at 1.
    pub index: usize,
    pub literals: Vec<Lit>,
}

/// Everything the sparse-FVS reduction decided, for reproducibility and inspection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SawPlan {
    pub mode: IndexMode,
    /// The source set, ordered by variable id.
    pub source: Vec<Var>,
    /// Bits per index.
    pub bits: usize,
    /// `idx[j][m]` is bit `m + 1` of index `j + 1`.
    pub idx: Vec<Vec<Var>>,
    pub val: Vec<Var>,
    pub sat: Var,
    pub clause_sat: Vec<Var>,
    pub codes: Vec<IndexCode>,
    /// `positions[i][j]` is the literal of clause `i` at position `j + 1`, if any.
    pub positions: Vec<Vec<Option<Lit>>>,
    /// The new sparse feedback vertex set.
    pub s_prime: Vec<Var>,
    /// Family of every term of the generated DNF, in order.
    pub term_groups: Vec<TermGroup>,
    /// Human-readable names of the fresh variables.
    pub names: BTreeMap<Var, String>,
    /// True when the input had an innermost universal block and was handled through
    /// its negation; the output is then negated back.
    pub negated: bool,
}

impl SawPlan {
    pub fn term_counts(&self) -> BTreeMap<TermGroup, usize> {
        let mut out = BTreeMap::new();
        for &g in &self.term_groups {
            *out.entry(g).or_default() += 1;
        }
        out
    }

    /// The code of `x` for index `j` (1-based).
    pub fn code(&self, x: Var, j: usize) -> Option<&[Lit]> {
        self.codes
            .iter()
            .find(|c| c.var == x && c.index == j)
            .map(|c| c.literals.as_slice())
    }

    /// Fresh variables in allocation order.
    pub fn fresh_vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = self.idx.iter().flatten().copied().collect();
        out.extend(&self.val);
        out.push(self.sat);
        out.extend(&self.clause_sat);
        out
    }
}

/// `⌈log₂ max(n, 1)⌉`.
pub fn bits_for(n: usize) -> usize {
    let n = n.max(1);
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

/// `rank` in binary over `vars`: bit `m` selects the sign of `vars[m]`.
fn binary_code(rank: usize, vars: &[Var]) -> Vec<Lit> {
    vars.iter()
        .enumerate()
        .map(|(m, &v)| Lit::new(v, rank >> m & 1 == 1))
        .collect()
}

/// Hands out fresh variable ids above an existing maximum and remembers their names.
struct Fresh {
    next: Var,
    names: BTreeMap<Var, String>,
    order: Vec<Var>,
}

impl Fresh {
    fn above(max: Var) -> Self {
        Fresh {
            next: max,
            names: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    fn var(&mut self, name: String) -> Var {
        self.next += 1;
        self.names.insert(self.next, name);
        self.order.push(self.next);
        self.next
    }
}

/// The clause part `C` and singleton-term part `D` of a formula whose innermost
/// quantifier is existential. A bare CNF has `D` true, encoded as one empty term.
fn split_cnf_dnf(q: &Qbf, max_clause: Option<usize>) -> Result<(Vec<Clause>, Vec<Term>)> {
    let (c, d) = match &q.matrix {
        Matrix::Cnf(c) => (c.clone(), vec![vec![]]),
        Matrix::Dnf(d) => (vec![], d.clone()),
        Matrix::Cdnf {
            cnf,
            dnf,
            orientation,
        } => {
            if *orientation != crate::formula::Orientation::CnfAndDnf {
                return Err(Error::pre(
                    "matrix orientation does not match the innermost quantifier",
                ));
            }
            (cnf.clone(), dnf.clone())
        }
    };
    if let Some(limit) = max_clause {
        if let Some(c) = c.iter().find(|c| c.len() > limit) {
            return Err(Error::pre(format!(
                "clause of width {} exceeds {limit}",
                c.len()
            )));
        }
    }
    if d.iter().any(|t| t.len() > 1) {
        return Err(Error::pre("the DNF part must consist of singleton terms"));
    }
    Ok((c, d))
}

/// Run `reduce` on `q` if its innermost block is existential, otherwise on its
/// negation, negating the result back.
fn with_existential_innermost<T>(
    q: &Qbf,
    reduce: impl FnOnce(&Qbf) -> Result<(Qbf, T)>,
) -> Result<(Qbf, T, bool)> {
    if q.innermost() == Some(Quant::Forall) {
        let (out, extra) = reduce(&negate(q))?;
        Ok((negate(&out), extra, true))
    } else {
        let (out, extra) = reduce(q)?;
        Ok((out, extra, false))
    }
}
