use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{
    evaluate, induced, restrict, Assignment, Clause, Lit, Matrix, Qbf, Quant, Var,
};
use crate::graphs::{build_graph, var_set, vertex_set, GraphKind};

fn require_cnf(q: &Qbf) -> Result<&[Clause]> {
    match &q.matrix {
        Matrix::Cnf(c) => Ok(c),
        _ => Err(Error::pre("deletion-set algorithms need a CNF matrix")),
    }
}

fn require_prefix_vars(q: &Qbf, d: &BTreeSet<Var>) -> Result<()> {
    let positions = q.positions();
    match d.iter().find(|v| !positions.contains_key(v)) {
        Some(v) => Err(Error::pre(format!(
            "deletion variable {v} is not in the prefix"
        ))),
        None => Ok(()),
    }
}

/// Components of the primal graph minus `d`, each listed in prefix order, ordered
/// by their first variable.
pub fn deletion_components(q: &Qbf, d: &BTreeSet<Var>) -> Vec<Vec<Var>> {
    let g = build_graph(q, GraphKind::Primal).without_vertices(&vertex_set(d));
    let positions = q.positions();
    let mut comps: Vec<Vec<Var>> = g
        .components()
        .into_iter()
        .map(|c| {
            let mut vars: Vec<Var> = var_set(&c.into_iter().collect()).into_iter().collect();
            vars.sort_by_key(|v| positions[v]);
            vars
        })
        .collect();
    comps.sort_by_key(|c| positions[&c[0]]);
    comps
}

/// Check that `d` is a `c`-deletion set (any `c` when `None`) and return the size
/// of the largest remaining component.
pub fn check_deletion_set(q: &Qbf, d: &BTreeSet<Var>, c: Option<usize>) -> Result<usize> {
    require_prefix_vars(q, d)?;
    let largest = deletion_components(q, d)
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0);
    match c {
        Some(c) if largest > c => Err(Error::pre(format!(
            "not a {c}-deletion set: a remaining component has {largest} variables"
        ))),
        _ => Ok(largest),
    }
}

/// Result of expanding the universal variables of a deletion set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    pub formula: Qbf,
    /// The new deletion set; all of its variables are existential.
    pub deletion_set: BTreeSet<Var>,
    /// Every copy introduced, mapped to the original variable it duplicates.
    pub copies: BTreeMap<Var, Var>,
    /// Universal deletion variables, in the order they were eliminated.
    pub eliminated: Vec<Var>,
    /// Largest component of the input, the `c` of the input deletion set.
    pub input_component_size: usize,
}

impl Expansion {
    /// `2^u · c`, the component size the new deletion set must respect.
    pub fn component_limit(&self) -> usize {
        (1usize << self.eliminated.len()) * self.input_component_size
    }
}

/// Eliminate the universal variables of a deletion set by quantifier expansion,
/// innermost first. Each step replaces `F` by `F[v=0] ∧ F'[v=1]`, where `F'` renames
/// every variable after `v` to a fresh copy quantified in the same way right after
/// the originals. Copies of later deletion variables join the deletion set.
pub fn expand_universal_deletions(q: &Qbf, d: &BTreeSet<Var>) -> Result<Expansion> {
    require_cnf(q)?;
    let input_component_size = check_deletion_set(q, d, None)?;
    let mut q = q.clone();
    let mut d = d.clone();
    let mut copies: BTreeMap<Var, Var> = BTreeMap::new();
    let mut eliminated = Vec::new();
    loop {
        let positions = q.positions();
        let Some(v) = d
            .iter()
            .copied()
            .filter(|&v| q.quant_of(v) == Some(Quant::Forall))
            .max_by_key(|v| positions[v])
        else {
            break;
        };
        let p = positions[&v];
        let later: Vec<(Quant, Var)> = q.prefix[p + 1..].to_vec();
        let mut out = Qbf {
            num_vars: q.num_vars,
            prefix: q.prefix[..p].to_vec(),
            matrix: Matrix::Cnf(vec![]),
        };
        let mut rename: BTreeMap<Var, Var> = BTreeMap::new();
        for &(_, w) in &later {
            let copy = out.fresh_var();
            rename.insert(w, copy);
            copies.insert(copy, copies.get(&w).copied().unwrap_or(w));
        }
        out.prefix.extend(&later);
        out.prefix
            .extend(later.iter().map(|&(k, w)| (k, rename[&w])));

        let low = restrict(&q, &[(v, false)].into_iter().collect());
        let high = restrict(&q, &[(v, true)].into_iter().collect());
        let mut clauses: Vec<Clause> = low.clauses().to_vec();
        clauses.extend(high.clauses().iter().map(|c| {
            c.iter()
                .map(|&l| match rename.get(&l.var()) {
                    Some(&w) => Lit::new(w, l.is_positive()),
                    None => l,
                })
                .collect::<Clause>()
        }));
        out.matrix = Matrix::Cnf(clauses);

        let added: Vec<Var> = d.iter().filter_map(|w| rename.get(w).copied()).collect();
        d.remove(&v);
        d.extend(added);
        eliminated.push(v);
        q = out;
    }
    q.validate()?;
    Ok(Expansion {
        formula: q,
        deletion_set: d,
        copies,
        eliminated,
        input_component_size,
    })
}

/// A variable of a component signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigVar {
    /// The component variable of this rank in prefix order, starting at 1.
    Local(usize),
    /// A deletion-set variable under its own name.
    Deleted(Var),
}

/// Canonical signature of a component: two components share it exactly when a
/// prefix-order-preserving renaming maps one restricted formula onto the other.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ComponentType {
    /// Per component variable in prefix order: its quantifier and the number of
    /// deletion-set variables before it.
    pub vars: Vec<(Quant, usize)>,
    /// Clauses touching the component, as sorted `(variable, polarity)` lists.
    pub clauses: Vec<Vec<(SigVar, bool)>>,
}

impl ComponentType {
    pub fn universal_count(&self) -> usize {
        self.vars.iter().filter(|v| v.0 == Quant::Forall).count()
    }

    /// At most one existential variable, placed before every universal one.
    pub fn is_exists_le1_forall(&self) -> bool {
        let existentials: Vec<usize> = self
            .vars
            .iter()
            .positions(|v| v.0 == Quant::Exists)
            .collect();
        match existentials.as_slice() {
            [] => true,
            [i] => *i == 0,
            _ => false,
        }
    }
}

/// The signature of one component (its variables in prefix order).
pub fn component_type(q: &Qbf, d: &BTreeSet<Var>, comp: &[Var]) -> ComponentType {
    let rank: BTreeMap<Var, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
    let mut deleted_before = 0;
    let mut vars = Vec::with_capacity(comp.len());
    for &(k, v) in &q.prefix {
        if d.contains(&v) {
            deleted_before += 1;
        } else if rank.contains_key(&v) {
            vars.push((k, deleted_before));
        }
    }
    let mut clauses: Vec<Vec<(SigVar, bool)>> = q
        .clauses()
        .iter()
        .filter(|c| c.iter().any(|l| rank.contains_key(&l.var())))
        .map(|c| {
            let mut sig: Vec<(SigVar, bool)> = c
                .iter()
                .map(|l| {
                    let var = match rank.get(&l.var()) {
                        Some(&r) => SigVar::Local(r),
                        None => SigVar::Deleted(l.var()),
                    };
                    (var, l.is_positive())
                })
                .collect();
            sig.sort();
            sig.dedup();
            sig
        })
        .collect();
    clauses.sort();
    clauses.dedup();
    ComponentType { vars, clauses }
}

/// The component of a type that orders it: its existential variable if it has
/// one, else its first variable.
fn designated_position(q: &Qbf, comp: &[Var], positions: &BTreeMap<Var, usize>) -> usize {
    comp.iter()
        .find(|&&v| q.quant_of(v) == Some(Quant::Exists))
        .or(comp.first())
        .map_or(0, |v| positions[v])
}

/// Components of `G − d` grouped by type; within a type, components are ordered by
/// the prefix position of their designated variable.
pub fn component_types(
    q: &Qbf,
    d: &BTreeSet<Var>,
) -> Result<BTreeMap<ComponentType, Vec<Vec<Var>>>> {
    require_cnf(q)?;
    require_prefix_vars(q, d)?;
    let positions = q.positions();
    let mut out: BTreeMap<ComponentType, Vec<Vec<Var>>> = BTreeMap::new();
    for comp in deletion_components(q, d) {
        out.entry(component_type(q, d, &comp))
            .or_default()
            .push(comp);
    }
    for comps in out.values_mut() {
        comps.sort_by_key(|c| designated_position(q, c, &positions));
    }
    Ok(out)
}

/// How many components of a `∃≤1∀` type survive pruning: `2^c − 1`, raised to
/// `2^{u+1} − 1` for purely universal types with `u = c` universals.
pub fn e1a_keep_count(c: usize, universals: usize) -> usize {
    let pow = |e: usize| 1usize.checked_shl(e as u32).unwrap_or(usize::MAX);
    (pow(c) - 1).max(pow(universals + 1) - 1)
}

/// Remove the variables and clauses of all but the first few components of type `t`.
pub fn prune_e1a_components(q: &Qbf, d: &BTreeSet<Var>, t: &ComponentType) -> Result<Qbf> {
    if !t.is_exists_le1_forall() {
        return Err(Error::pre("component type is not of the form ∃≤1∀"));
    }
    let c = check_deletion_set(q, d, None)?;
    let types = component_types(q, d)?;
    let Some(comps) = types.get(t) else {
        return Ok(q.clone());
    };
    let keep = e1a_keep_count(c, t.universal_count());
    let removed: BTreeSet<Var> = comps.iter().skip(keep).flatten().copied().collect();
    let clauses: Vec<Clause> = q
        .clauses()
        .iter()
        .filter(|cl| !cl.iter().any(|l| removed.contains(&l.var())))
        .cloned()
        .collect();
    Ok(Qbf {
        num_vars: q.num_vars,
        prefix: q
            .prefix
            .iter()
            .copied()
            .filter(|(_, v)| !removed.contains(v))
            .collect(),
        matrix: Matrix::Cnf(clauses),
    })
}

/// Prune every type; all components must be of the form `∃≤1∀`.
pub fn prune_all_e1a(q: &Qbf, d: &BTreeSet<Var>) -> Result<Qbf> {
    let types = component_types(q, d)?;
    if let Some((_, comps)) = types.iter().find(|(t, _)| !t.is_exists_le1_forall()) {
        return Err(Error::pre(format!(
            "component {:?} is not of the form ∃≤1∀",
            comps[0]
        )));
    }
    let mut out = q.clone();
    for t in types.keys() {
        out = prune_e1a_components(&out, d, t)?;
    }
    Ok(out)
}

/// Decide a formula whose deletion set leaves only `∃≤1∀` components: prune every
/// type to a bounded number of components, then evaluate the residue exhaustively.
pub fn solve_e1a(q: &Qbf, d: &BTreeSet<Var>) -> Result<bool> {
    evaluate(&prune_all_e1a(q, d)?)
}

/// Whether the existential player has a winning strategy on `q_local` that always
/// plays `beta` on the deletion set `d`: the truth value of `q_local[beta]`.
pub fn forces_assignment(q_local: &Qbf, d: &BTreeSet<Var>, beta: &Assignment) -> Result<bool> {
    let domain: BTreeSet<Var> = beta.iter().map(|(v, _)| v).collect();
    if &domain != d {
        return Err(Error::pre(
            "the assignment must be defined exactly on the deletion set",
        ));
    }
    if let Some(v) = d
        .iter()
        .find(|&&v| q_local.quant_of(v) != Some(Quant::Exists))
    {
        return Err(Error::pre(format!(
            "deletion variable {v} is not existential"
        )));
    }
    evaluate(&restrict(q_local, beta))
}

/// Largest deletion set whose assignments are enumerated.
pub const MAX_ENUMERATED_DELETION_SET: usize = 20;

/// Verdict and witness of the universally-complete solver.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompleteReport {
    pub value: bool,
    /// An assignment of the deletion set in every `A(t)`, when one exists.
    pub witness: Option<Assignment>,
    pub types: usize,
    /// Deletion set after universal expansion.
    pub deletion_set: BTreeSet<Var>,
}

/// The set `A(t)` of deletion-set assignments forced by some winning strategy on
/// `Q|_{D ∪ C}`, for a representative component `C`.
pub fn forced_assignments(q: &Qbf, d: &BTreeSet<Var>, comp: &[Var]) -> Result<BTreeSet<Vec<bool>>> {
    let mut keep = d.clone();
    keep.extend(comp);
    let local = induced(q, &keep);
    let ds: Vec<Var> = d.iter().copied().collect();
    let mut out = BTreeSet::new();
    for mask in 0..1u64 << ds.len() {
        let beta = Assignment::from_bits(&ds, mask);
        if forces_assignment(&local, d, &beta)? {
            out.insert(ds.iter().map(|&v| beta.get(v) == Some(true)).collect());
        }
    }
    Ok(out)
}

/// Decide a formula with a universally complete deletion set: true iff some
/// assignment of the deletion set lies in `A(t)` for every component type `t`.
/// Universal deletion variables are expanded first.
pub fn solve_universally_complete(q: &Qbf, d: &BTreeSet<Var>) -> Result<CompleteReport> {
    let exp = expand_universal_deletions(q, d)?;
    let (q, d) = (&exp.formula, &exp.deletion_set);
    if d.len() > MAX_ENUMERATED_DELETION_SET {
        return Err(Error::pre(format!(
            "deletion set of {} variables is too large to enumerate",
            d.len()
        )));
    }
    let types = component_types(q, d)?;
    let need = 1usize << d.len();
    let deficient: Vec<String> = types
        .values()
        .filter(|comps| comps.len() < need)
        .map(|comps| format!("{:?} ({} of {need})", comps[0], comps.len()))
        .collect();
    if !deficient.is_empty() {
        return Err(Error::pre(format!(
            "deletion set is not universally complete; deficient types: {}",
            deficient.join(", ")
        )));
    }
    // Clauses over the deletion set alone constrain every assignment.
    let ds: Vec<Var> = d.iter().copied().collect();
    let mut candidates: BTreeSet<Vec<bool>> = forced_assignments(q, d, &[])?;
    for comps in types.values() {
        let allowed = forced_assignments(q, d, &comps[0])?;
        candidates.retain(|b| allowed.contains(b));
    }
    let witness = candidates.first().map(|bits| {
        ds.iter()
            .copied()
            .zip(bits.iter().copied())
            .collect::<Assignment>()
    });
    Ok(CompleteReport {
        value: witness.is_some(),
        witness,
        types: types.len(),
        deletion_set: d.clone(),
    })
}
