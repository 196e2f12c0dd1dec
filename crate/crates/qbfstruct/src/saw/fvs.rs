use std::collections::{BTreeMap, BTreeSet};

use super::{
    binary_code, bits_for, split_cnf_dnf, with_existential_innermost, Fresh, IndexCode, IndexMode,
    SawPlan, TermGroup,
};
use crate::error::{Error, Result};
use crate::formula::{Clause, Lit, Matrix, Orientation, Qbf, Quant, Term, Var};
use crate::graphs::{build_graph, is_deletion_set, vertex_set, DeletionKind, GraphKind};

/// A set of variables addressed through shared index and value variables.
pub(super) struct Family<'a> {
    /// Index code per member and index number (1-based).
    pub codes: &'a BTreeMap<(Var, usize), Vec<Lit>>,
    pub val: &'a [Var],
    /// Selector literal prepended to the guess terms of a member.
    pub selector: &'a dyn Fn(Var) -> Option<Var>,
    pub groups: [TermGroup; 5],
}

impl Family<'_> {
    fn contains(&self, x: Var) -> bool {
        self.codes.keys().any(|&(v, _)| v == x)
    }
}

/// Accumulates generated terms with their families.
#[derive(Default)]
pub(super) struct Emitter {
    pub terms: Vec<Term>,
    pub groups: Vec<TermGroup>,
}

impl Emitter {
    fn push(&mut self, group: TermGroup, term: Term) {
        self.terms.push(term);
        self.groups.push(group);
    }

    /// Guess terms tying each member's value to the value variable of the index addressing it.
    pub fn guesses(&mut self, f: &Family) {
        for (positive, group) in [(true, f.groups[0]), (false, f.groups[1])] {
            for (&(x, j), code) in f.codes {
                let mut t = vec![Lit::new(x, positive)];
                t.extend((f.selector)(x).map(Lit::pos));
                t.extend(code);
                t.push(Lit::new(f.val[j - 1], !positive));
                self.push(group, t);
            }
        }
    }

    /// Clause-checking terms for the positions holding members of `f`.
    pub fn clause_checks(
        &mut self,
        f: &Family,
        positions: &[Vec<Option<Lit>>],
        clause_sat: &[Var],
    ) {
        let [_, _, miss, value_true, value_false] = f.groups;
        let held = |i: usize| {
            positions[i]
                .iter()
                .enumerate()
                .filter_map(|(j, l)| l.filter(|l| f.contains(l.var())).map(|l| (j + 1, l)))
                .collect::<Vec<_>>()
        };
        for (i, &s) in clause_sat.iter().enumerate() {
            for (j, l) in held(i) {
                for &b in &f.codes[&(l.var(), j)] {
                    self.push(miss, vec![Lit::pos(s), !b]);
                }
            }
        }
        for (positive, group) in [(true, value_true), (false, value_false)] {
            for (i, &s) in clause_sat.iter().enumerate() {
                for (j, l) in held(i) {
                    if l.is_positive() == positive {
                        self.push(group, vec![Lit::pos(s), Lit::new(f.val[j - 1], positive)]);
                    }
                }
            }
        }
    }

    /// `sat_i ∧ l` for literals outside every indexed family.
    pub fn plain_literals(
        &mut self,
        positions: &[Vec<Option<Lit>>],
        clause_sat: &[Var],
        indexed: &dyn Fn(Var) -> bool,
    ) {
        for (i, &s) in clause_sat.iter().enumerate() {
            for l in positions[i].iter().flatten() {
                if !indexed(l.var()) {
                    self.push(TermGroup::ClauseLiteral, vec![Lit::pos(s), *l]);
                }
            }
        }
    }

    /// `sat ∧ d` for each term `d` of the singleton DNF.
    pub fn dnf_terms(&mut self, d: &[Term], sat: Var) {
        for t in d {
            let mut term = vec![Lit::pos(sat)];
            term.extend(t);
            self.push(TermGroup::DnfLiteral, term);
        }
    }
}

/// Append the fresh variables as an innermost universal block and build the
/// `DNF ∨ 1-CNF` matrix switching off every `sat` variable.
pub(super) fn assemble(q: &Qbf, fresh: &Fresh, terms: Vec<Term>, switches: &[Var]) -> Result<Qbf> {
    let mut prefix = q.prefix.clone();
    prefix.extend(fresh.order.iter().map(|&v| (Quant::Forall, v)));
    let cnf: Vec<Clause> = switches.iter().map(|&s| vec![Lit::neg(s)]).collect();
    let matrix = Matrix::Cdnf {
        cnf,
        dnf: terms,
        orientation: Orientation::DnfOrCnf,
    };
    Qbf::new(fresh.next.max(q.num_vars), prefix, matrix)
}

pub(super) fn sorted_positions(c: &[Clause]) -> Vec<Vec<Option<Lit>>> {
    c.iter()
        .map(|clause| {
            let mut lits = clause.clone();
            lits.sort();
            lits.into_iter().map(Some).collect()
        })
        .collect()
}

fn dedicated_positions(c: &[Clause], source: &[Var]) -> Vec<Vec<Option<Lit>>> {
    c.iter()
        .map(|clause| {
            let mut row: Vec<Option<Lit>> = source
                .iter()
                .map(|&x| clause.iter().copied().find(|l| l.var() == x))
                .collect();
            let mut rest: Vec<Lit> = clause
                .iter()
                .copied()
                .filter(|l| !source.contains(&l.var()))
                .collect();
            rest.sort();
            row.extend(rest.into_iter().map(Some));
            row
        })
        .collect()
}

pub(super) fn check_source(q: &Qbf, source: &BTreeSet<Var>, kind: DeletionKind) -> Result<()> {
    if let Some(x) = source.iter().find(|&&x| q.quant_of(x).is_none()) {
        return Err(Error::pre(format!("x{x} is not a variable of the formula")));
    }
    let g = build_graph(q, GraphKind::Primal);
    if !is_deletion_set(&g, Some(q), kind, &vertex_set(source)) {
        return Err(Error::pre(
            "the given set is not a sparse feedback vertex set",
        ));
    }
    Ok(())
}

/// Replace the variables of a sparse feedback vertex set by index/value/switch
/// variables, returning the formula, the new sparse FVS and the plan.
pub fn saw_reduce_fvs(q: &Qbf, source: &BTreeSet<Var>) -> Result<(Qbf, Vec<Var>, SawPlan)> {
    saw_reduce_fvs_with(q, source, IndexMode::Standard)
}

pub fn saw_reduce_fvs_with(
    q: &Qbf,
    source: &BTreeSet<Var>,
    mode: IndexMode,
) -> Result<(Qbf, Vec<Var>, SawPlan)> {
    check_source(q, source, DeletionKind::SparseFvs)?;
    let (out, mut plan, negated) = with_existential_innermost(q, |q| reduce(q, source, mode))?;
    plan.negated = negated;
    Ok((out, plan.s_prime.clone(), plan))
}

fn reduce(q: &Qbf, source: &BTreeSet<Var>, mode: IndexMode) -> Result<(Qbf, SawPlan)> {
    let (c, d) = split_cnf_dnf(q, Some(3))?;
    let source: Vec<Var> = source.iter().copied().collect();
    let bits = bits_for(source.len());
    let indices = match mode {
        IndexMode::Standard => 3,
        IndexMode::Dedicated => source.len(),
    };
    let mut fresh = Fresh::above(q.num_vars);
    let idx: Vec<Vec<Var>> = (1..=indices)
        .map(|j| {
            (1..=bits)
                .map(|m| fresh.var(format!("idx_{j}^{m}")))
                .collect()
        })
        .collect();
    let val: Vec<Var> = (1..=indices)
        .map(|j| fresh.var(format!("val_{j}")))
        .collect();
    let sat = fresh.var("sat".into());
    let clause_sat: Vec<Var> = (1..=c.len())
        .map(|i| fresh.var(format!("sat_{i}")))
        .collect();

    let mut codes: BTreeMap<(Var, usize), Vec<Lit>> = BTreeMap::new();
    for (rank, &x) in source.iter().enumerate() {
        match mode {
            IndexMode::Standard => {
                for j in 1..=3 {
                    codes.insert((x, j), binary_code(rank, &idx[j - 1]));
                }
            }
            IndexMode::Dedicated => {
                codes.insert((x, rank + 1), binary_code(0, &idx[rank]));
            }
        }
    }
    let positions = match mode {
        IndexMode::Standard => sorted_positions(&c),
        IndexMode::Dedicated => dedicated_positions(&c, &source),
    };

    let no_selector = |_: Var| None;
    let family = Family {
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
    let mut emit = Emitter::default();
    emit.guesses(&family);
    emit.plain_literals(&positions, &clause_sat, &|v| source.contains(&v));
    emit.clause_checks(&family, &positions, &clause_sat);
    emit.dnf_terms(&d, sat);

    let mut switches = clause_sat.clone();
    switches.push(sat);
    let out = assemble(q, &fresh, emit.terms, &switches)?;

    let mut s_prime: Vec<Var> = idx.iter().flatten().copied().collect();
    s_prime.extend(&val);
    s_prime.push(sat);
    let plan = SawPlan {
        mode,
        source,
        bits,
        idx,
        val,
        sat,
        clause_sat,
        codes: codes
            .into_iter()
            .map(|((var, index), literals)| IndexCode {
                var,
                index,
                literals,
            })
            .collect(),
        positions,
        s_prime,
        term_groups: emit.groups,
        names: fresh.names,
        negated: false,
    };
    Ok((out, plan))
}

/// Multiplier relating the output size to `max(1,⌈log₂(|S|+1)⌉)·(|S|+|C|) + |D| + 1`.
pub const SIZE_CONSTANT: usize = 18;

/// `(literal occurrences of the output, size bound)` for a reduction run on a
/// formula with `clauses` clauses and `dnf_terms` singleton terms.
pub fn size_accounting(
    out: &Qbf,
    plan: &SawPlan,
    clauses: usize,
    dnf_terms: usize,
) -> (usize, usize) {
    let log = bits_for(plan.source.len() + 1).max(1);
    let bound = SIZE_CONSTANT * (log * (plan.source.len() + clauses) + dnf_terms + 1);
    (out.matrix.literal_count(), bound)
}
