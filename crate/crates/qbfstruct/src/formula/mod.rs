//! QBF data model: literals, prefixes, CNF/DNF/CDNF matrices and assignments.

mod eval;
mod ops;
mod text;
mod twosat;

pub use eval::{evaluate, evaluate_with_budget, var_budget, DEFAULT_VAR_BUDGET};
pub use ops::{eliminate_innermost, induced, negate, restrict, substitute};
pub use text::{parse, serialize, Format, ParseOptions};
pub use twosat::{matrix_sat_2cnf_plus_1dnf, two_sat};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variables are dense positive integers, as in DIMACS.
pub type Var = u32;

/// A literal in DIMACS encoding: `v` or `-v`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lit(i32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        assert!(
            var > 0 && var <= i32::MAX as u32,
            "variable id out of range"
        );
        Lit(if positive { var as i32 } else { -(var as i32) })
    }

    pub fn pos(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Lit {
        Lit::new(var, false)
    }

    pub fn from_dimacs(code: i32) -> Option<Lit> {
        (code != 0).then_some(Lit(code))
    }

    pub fn dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }

    /// The value of the variable that makes this literal true.
    pub fn satisfying_value(self) -> bool {
        self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

// Literals sort by variable, negative before positive.
impl Ord for Lit {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.var(), self.is_positive()).cmp(&(other.var(), other.is_positive()))
    }
}

impl PartialOrd for Lit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A clause (disjunction) or a term (conjunction), depending on context.
pub type Clause = Vec<Lit>;
pub type Term = Vec<Lit>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quant {
    Exists,
    Forall,
}

impl Quant {
    pub fn flip(self) -> Quant {
        match self {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Quant::Exists => 'e',
            Quant::Forall => 'a',
        }
    }
}

/// How the two parts of a CDNF matrix combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// `C ∧ D`, the shape required under an innermost existential block.
    CnfAndDnf,
    /// `D ∨ C`, the shape required under an innermost universal block.
    DnfOrCnf,
}

impl Orientation {
    pub fn for_innermost(q: Quant) -> Orientation {
        match q {
            Quant::Exists => Orientation::CnfAndDnf,
            Quant::Forall => Orientation::DnfOrCnf,
        }
    }

    pub fn flip(self) -> Orientation {
        match self {
            Orientation::CnfAndDnf => Orientation::DnfOrCnf,
            Orientation::DnfOrCnf => Orientation::CnfAndDnf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Matrix {
    Cnf(Vec<Clause>),
    Dnf(Vec<Term>),
    Cdnf {
        cnf: Vec<Clause>,
        dnf: Vec<Term>,
        orientation: Orientation,
    },
}

impl Matrix {
    /// The CNF part (empty for a pure DNF).
    pub fn clauses(&self) -> &[Clause] {
        match self {
            Matrix::Cnf(c) | Matrix::Cdnf { cnf: c, .. } => c,
            Matrix::Dnf(_) => &[],
        }
    }

    /// The DNF part (empty for a pure CNF).
    pub fn terms(&self) -> &[Term] {
        match self {
            Matrix::Dnf(d) | Matrix::Cdnf { dnf: d, .. } => d,
            Matrix::Cnf(_) => &[],
        }
    }

    /// Every clause and term, clauses first.
    pub fn sets(&self) -> impl Iterator<Item = &Vec<Lit>> {
        self.clauses().iter().chain(self.terms())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.sets().flatten().map(|l| l.var()).collect()
    }

    pub fn literal_count(&self) -> usize {
        self.sets().map(Vec::len).sum()
    }

    pub fn is_cnf(&self) -> bool {
        matches!(self, Matrix::Cnf(_))
    }

    /// Three-valued evaluation under a partial assignment: `None` while undetermined.
    pub fn status(&self, value: impl Fn(Var) -> Option<bool>) -> Option<bool> {
        let cnf = |cs: &[Clause]| cnf_status(cs, &value);
        let dnf = |ts: &[Term]| dnf_status(ts, &value);
        match self {
            Matrix::Cnf(c) => cnf(c),
            Matrix::Dnf(d) => dnf(d),
            Matrix::Cdnf {
                cnf: c,
                dnf: d,
                orientation: Orientation::CnfAndDnf,
            } => match (cnf(c), dnf(d)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Matrix::Cdnf {
                cnf: c,
                dnf: d,
                orientation: Orientation::DnfOrCnf,
            } => match (dnf(d), cnf(c)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
        }
    }

    /// Evaluate under a total assignment of the matrix variables.
    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        self.status(|v| Some(value(v)))
            .expect("total assignment determines the matrix")
    }
}

fn cnf_status(clauses: &[Clause], value: &impl Fn(Var) -> Option<bool>) -> Option<bool> {
    let mut all_sat = true;
    for c in clauses {
        let mut sat = false;
        let mut open = false;
        for &l in c {
            match value(l.var()) {
                Some(v) if l.eval(v) => {
                    sat = true;
                    break;
                }
                Some(_) => {}
                None => open = true,
            }
        }
        if !sat {
            if !open {
                return Some(false);
            }
            all_sat = false;
        }
    }
    all_sat.then_some(true)
}

fn dnf_status(terms: &[Term], value: &impl Fn(Var) -> Option<bool>) -> Option<bool> {
    let mut all_false = true;
    for t in terms {
        let mut falsified = false;
        let mut open = false;
        for &l in t {
            match value(l.var()) {
                Some(v) if !l.eval(v) => {
                    falsified = true;
                    break;
                }
                Some(_) => {}
                None => open = true,
            }
        }
        if !falsified {
            if !open {
                return Some(true);
            }
            all_false = false;
        }
    }
    if all_false {
        Some(false)
    } else {
        None
    }
}

/// A quantified Boolean formula in prenex form with an atomic prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Qbf {
    /// Declared variable count; every id used is at most this.
    pub num_vars: u32,
    /// One entry per variable, outermost first.
    pub prefix: Vec<(Quant, Var)>,
    pub matrix: Matrix,
}

impl Qbf {
    /// Build and validate a formula.
    pub fn new(num_vars: u32, prefix: Vec<(Quant, Var)>, matrix: Matrix) -> Result<Qbf> {
        let q = Qbf {
            num_vars,
            prefix,
            matrix,
        };
        q.validate()?;
        Ok(q)
    }

    /// Convenience constructor: a prefix given as blocks.
    pub fn from_blocks(blocks: &[(Quant, &[Var])], matrix: Matrix) -> Result<Qbf> {
        let prefix: Vec<(Quant, Var)> = blocks
            .iter()
            .flat_map(|&(q, vs)| vs.iter().map(move |&v| (q, v)))
            .collect();
        let max_prefix = prefix.iter().map(|p| p.1).max().unwrap_or(0);
        let max_matrix = matrix.vars().into_iter().max().unwrap_or(0);
        Qbf::new(max_prefix.max(max_matrix), prefix, matrix)
    }

    /// Check the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &(_, v) in &self.prefix {
            if v == 0 || v > self.num_vars {
                return Err(Error::pre(format!("prefix variable {v} out of range")));
            }
            if !seen.insert(v) {
                return Err(Error::pre(format!("variable {v} quantified twice")));
            }
        }
        for set in self.matrix.sets() {
            let mut vars = BTreeSet::new();
            for l in set {
                if !seen.contains(&l.var()) {
                    return Err(Error::pre(format!("variable {} not quantified", l.var())));
                }
                if !vars.insert(l.var()) {
                    return Err(Error::pre(format!(
                        "variable {} repeated within one clause or term",
                        l.var()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn quant_of(&self, v: Var) -> Option<Quant> {
        self.prefix.iter().find(|p| p.1 == v).map(|p| p.0)
    }

    /// Prefix position of every variable.
    pub fn positions(&self) -> BTreeMap<Var, usize> {
        self.prefix
            .iter()
            .enumerate()
            .map(|(i, &(_, v))| (v, i))
            .collect()
    }

    pub fn vars(&self) -> Vec<Var> {
        self.prefix.iter().map(|p| p.1).collect()
    }

    pub fn innermost(&self) -> Option<Quant> {
        self.prefix.last().map(|p| p.0)
    }

    /// Maximal runs of equal quantifiers.
    pub fn blocks(&self) -> Vec<(Quant, Vec<Var>)> {
        let mut blocks: Vec<(Quant, Vec<Var>)> = Vec::new();
        for &(q, v) in &self.prefix {
            match blocks.last_mut() {
                Some((bq, vs)) if *bq == q => vs.push(v),
                _ => blocks.push((q, vec![v])),
            }
        }
        blocks
    }

    /// Quantifier depth: the number of blocks.
    pub fn depth(&self) -> usize {
        self.blocks().len()
    }

    pub fn clauses(&self) -> &[Clause] {
        self.matrix.clauses()
    }

    pub fn terms(&self) -> &[Term] {
        self.matrix.terms()
    }

    /// A fresh variable id above everything declared.
    pub fn fresh_var(&mut self) -> Var {
        self.num_vars += 1;
        self.num_vars
    }

    /// Total size: variables plus clauses/terms plus literal occurrences.
    pub fn size(&self) -> usize {
        self.prefix.len() + self.matrix.sets().count() + self.matrix.literal_count()
    }
}

/// A partial map from variables to truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(pub BTreeMap<Var, bool>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.0.get(&v).copied()
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.0.insert(v, value);
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    /// Assignment of `vars` read from the low bits of `mask` (first variable = bit 0).
    pub fn from_bits(vars: &[Var], mask: u64) -> Self {
        Assignment(
            vars.iter()
                .enumerate()
                .map(|(i, &v)| (v, mask >> i & 1 == 1))
                .collect(),
        )
    }

    /// Union of two assignments; `other` wins on conflicts.
    pub fn union(&self, other: &Assignment) -> Assignment {
        let mut out = self.clone();
        out.0.extend(other.iter());
        out
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Sort literals within each set and the sets themselves; drop duplicate sets.
pub fn canonical_sets(sets: &[Vec<Lit>]) -> Vec<Vec<Lit>> {
    let mut out: Vec<Vec<Lit>> = sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort();
            s.dedup();
            s
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// True if the set contains a variable in both polarities.
pub fn has_complementary(set: &[Lit]) -> bool {
    set.iter().any(|&l| set.contains(&!l))
}
