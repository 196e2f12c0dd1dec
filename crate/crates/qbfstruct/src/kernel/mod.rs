//! Feedback-edge-set kernelization for CNF formulas, on the primal or the incidence graph.
//!
//! Rules run to exhaustion in a fixed priority order, and every application is traced.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{restrict, substitute, Assignment, Clause, Lit, Matrix, Qbf, Quant, Var};
use crate::graphs::{
    build_graph, clean_structure_of, min_fes, CleanPath, CleanStructure, GraphKind, Vertex,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Dedup,
    Unit,
    Pure,
    Multiplicity,
    Pair,
    Leaf,
    Path,
}

/// One rule application.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: Rule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var: Option<Var>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assigned: Option<u8>,
    /// Literal that replaced `var` (pair substitution).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replaced_by: Option<Lit>,
    /// Set when the step decided the formula.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
}

impl TraceStep {
    fn new(rule: Rule) -> Self {
        TraceStep {
            rule,
            var: None,
            assigned: None,
            replaced_by: None,
            verdict: None,
        }
    }

    fn on(mut self, v: Var) -> Self {
        self.var = Some(v);
        self
    }

    fn assign(mut self, value: bool) -> Self {
        self.assigned = Some(u8::from(value));
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelStats {
    /// Feedback edge number of the input's graph.
    pub k: usize,
    pub input_vars: usize,
    pub input_clauses: usize,
    pub kernel_vars: usize,
    pub kernel_clauses: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelResult {
    /// The reduced formula; the canonical constant formula when decided.
    pub kernel: Qbf,
    /// `Some` when the rules decided the formula outright.
    pub verdict: Option<bool>,
    pub trace: Vec<TraceStep>,
    pub stats: KernelStats,
}

/// Canonical decided formulas: the empty CNF (true) and the CNF holding the empty clause (false).
pub fn constant(value: bool) -> Qbf {
    let clauses = if value { vec![] } else { vec![vec![]] };
    Qbf {
        num_vars: 0,
        prefix: vec![],
        matrix: Matrix::Cnf(clauses),
    }
}

/// Variables of the canonical constant kernels.
pub const CONSTANT_KERNEL_VARS: usize = 0;
/// Clauses of the canonical constant kernels (the false kernel has one).
pub const CONSTANT_KERNEL_CLAUSES: usize = 1;

/// Variable bound for the primal kernel: `max(C₀, 12k − 8)`.
#[allow(clippy::unnecessary_min_or_max)] // the constant kernel happens to have no variables
pub fn primal_var_bound(k: usize) -> usize {
    (12 * k).saturating_sub(8).max(CONSTANT_KERNEL_VARS)
}

/// Clause bound for the primal kernel: `max(C₀, 10k − 9 + 3^⌊(√(24k+1)+1)/2⌋)`.
pub fn primal_clause_bound(k: usize) -> usize {
    let n = (((24 * k + 1) as f64).sqrt() + 1.0) / 2.0;
    let clique = 3usize.saturating_pow(n.floor() as u32);
    ((10 * k + clique) as i64 - 9).max(CONSTANT_KERNEL_CLAUSES as i64) as usize
}

/// Bound on variables plus clauses for the incidence kernel: `max(C₀, 24k − 17)`.
pub fn incidence_size_bound(k: usize) -> usize {
    (24 * k)
        .saturating_sub(17)
        .max(CONSTANT_KERNEL_VARS + CONSTANT_KERNEL_CLAUSES)
}

enum Step {
    Changed(TraceStep),
    Decided(TraceStep, bool),
    None,
}

struct Work {
    q: Qbf,
    kind: GraphKind,
}

impl Work {
    fn clauses(&self) -> &[Clause] {
        self.q.clauses()
    }

    fn clauses_mut(&mut self) -> &mut Vec<Clause> {
        match &mut self.q.matrix {
            Matrix::Cnf(c) => c,
            _ => unreachable!("kernelization works on CNF"),
        }
    }

    fn quant(&self, v: Var) -> Quant {
        self.q.quant_of(v).expect("quantified variable")
    }

    fn assign(&mut self, v: Var, value: bool) {
        self.q = restrict(&self.q, &Assignment::from_iter([(v, value)]));
    }

    fn dedup(&mut self) -> Step {
        let mut seen = BTreeSet::new();
        let before = self.clauses().len();
        let mut kept = Vec::with_capacity(before);
        for c in self.clauses() {
            let mut key = c.clone();
            key.sort();
            if seen.insert(key) {
                kept.push(c.clone());
            }
        }
        if kept.len() < before {
            *self.clauses_mut() = kept;
            return Step::Changed(TraceStep::new(Rule::Dedup));
        }
        Step::None
    }

    fn unit(&mut self) -> Step {
        let Some(l) = self.clauses().iter().find(|c| c.len() == 1).map(|c| c[0]) else {
            return Step::None;
        };
        let step = TraceStep::new(Rule::Unit).on(l.var());
        if self.quant(l.var()) == Quant::Forall {
            return Step::Decided(step, false);
        }
        self.assign(l.var(), l.satisfying_value());
        Step::Changed(step.assign(l.satisfying_value()))
    }

    fn pure(&mut self) -> Step {
        let mut polarity: BTreeMap<Var, (bool, bool)> = BTreeMap::new();
        for l in self.clauses().iter().flatten() {
            let e = polarity.entry(l.var()).or_default();
            if l.is_positive() {
                e.0 = true;
            } else {
                e.1 = true;
            }
        }
        for (quant, v) in self.q.prefix.clone() {
            match polarity.get(&v) {
                None => {
                    self.q.prefix.retain(|p| p.1 != v);
                    return Step::Changed(TraceStep::new(Rule::Pure).on(v));
                }
                Some(&(pos, neg)) if pos != neg => {
                    // Existentials satisfy their literal, universals falsify it.
                    let value = pos == (quant == Quant::Exists);
                    self.assign(v, value);
                    return Step::Changed(TraceStep::new(Rule::Pure).on(v).assign(value));
                }
                _ => {}
            }
        }
        Step::None
    }

    fn structure(&self) -> CleanStructure {
        let g = build_graph(&self.q, self.kind);
        clean_structure_of(&g, &min_fes(&g)).expect("a spanning-forest complement is a valid FES")
    }

    /// Two-literal clauses over exactly the variables `u` and `v`.
    fn pair_clauses(&self, u: Var, v: Var) -> Vec<Clause> {
        self.clauses()
            .iter()
            .filter(|c| {
                c.len() == 2 && c.iter().any(|l| l.var() == u) && c.iter().any(|l| l.var() == v)
            })
            .cloned()
            .collect()
    }

    fn satisfiers(clauses: &[Clause], u: Var) -> Vec<(bool, bool)> {
        let mut out = Vec::new();
        for bits in 0..4u8 {
            let (a, b) = (bits & 2 != 0, bits & 1 != 0);
            let value = |x: Var| if x == u { a } else { b };
            if clauses
                .iter()
                .all(|c| c.iter().any(|l| l.eval(value(l.var()))))
            {
                out.push((a, b));
            }
        }
        out
    }

    fn clean_var_edges(s: &CleanStructure) -> Vec<(Var, Var)> {
        s.clean_edges
            .iter()
            .filter_map(|&(a, b)| Some((a.as_var()?, b.as_var()?)))
            .collect()
    }

    /// Multiplicity rule on the clean edge `{u, v}`; `None` unless 3 or 4 clauses share it.
    fn multiplicity_on(&mut self, u: Var, v: Var) -> Option<Step> {
        let shared = self.pair_clauses(u, v);
        if shared.len() < 3 {
            return None;
        }
        let step = TraceStep::new(Rule::Multiplicity).on(u);
        let sats = Self::satisfiers(&shared, u);
        let [(a, b)] = sats.as_slice() else {
            return Some(Step::Decided(step, false));
        };
        if self.quant(u) == Quant::Forall || self.quant(v) == Quant::Forall {
            return Some(Step::Decided(step, false));
        }
        self.q = restrict(&self.q, &Assignment::from_iter([(u, *a), (v, *b)]));
        Some(Step::Changed(step))
    }

    /// Pair rule on the clean edge `{u, v}`; `None` unless exactly two clauses share it.
    fn pair_on(&mut self, u: Var, v: Var) -> Option<Step> {
        let shared = self.pair_clauses(u, v);
        if shared.len() != 2 {
            return None;
        }
        let sats = Self::satisfiers(&shared, u);
        let [(a1, b1), (a2, b2)] = sats[..] else {
            unreachable!("two distinct 2-clauses on two variables have two models")
        };
        let fixed = if a1 == a2 {
            Some((u, a1))
        } else if b1 == b2 {
            Some((v, b1))
        } else {
            None
        };
        if let Some((w, value)) = fixed {
            let step = TraceStep::new(Rule::Pair).on(w);
            if self.quant(w) == Quant::Forall {
                return Some(Step::Decided(step, false));
            }
            self.assign(w, value);
            return Some(Step::Changed(step.assign(value)));
        }
        let pos = self.q.positions();
        let (first, second) = if pos[&u] < pos[&v] { (u, v) } else { (v, u) };
        let step = TraceStep::new(Rule::Pair).on(second);
        if self.quant(second) == Quant::Forall {
            return Some(Step::Decided(step, false));
        }
        // The models are (a, a) and (¬a, ¬a) or (a, ¬a) and (¬a, a).
        let target = Lit::new(first, a1 == b1);
        self.q = substitute(&self.q, &BTreeMap::from([(second, target)]));
        Some(Step::Changed(TraceStep {
            replaced_by: Some(target),
            ..step
        }))
    }

    /// Leaf rule; `None` when `l` is not a leaf of the forest outside the deleted edges'
    /// endpoints or does not sit in a single 2-clause.
    fn leaf_on(&mut self, s: &CleanStructure, l: Var) -> Option<Step> {
        let vert = Vertex::Var(l);
        let g = build_graph(&self.q, self.kind);
        let deleted: BTreeSet<_> = min_fes(&g).into_iter().collect();
        if g.without_edges(&deleted).degree(vert) != 1 || s.fes_vertices.contains(&vert) {
            return None;
        }
        let holding: Vec<&Clause> = self
            .clauses()
            .iter()
            .filter(|c| c.iter().any(|x| x.var() == l))
            .collect();
        let [clause] = holding[..] else { return None };
        if clause.len() != 2 {
            return None;
        }
        let lit = *clause.iter().find(|x| x.var() == l)?;
        let value = lit.satisfying_value() == (self.quant(l) == Quant::Exists);
        self.assign(l, value);
        Some(Step::Changed(
            TraceStep::new(Rule::Leaf).on(l).assign(value),
        ))
    }

    /// The two clauses of `v` if they match the contraction pattern:
    /// `l_u ∨ l_v` and `l_w ∨ ¬l_v` with `u ≠ w`.
    fn contraction_pattern(&self, v: Var) -> Option<(usize, usize, Var, Var)> {
        let holding: Vec<usize> = (0..self.clauses().len())
            .filter(|&i| self.clauses()[i].iter().any(|l| l.var() == v))
            .collect();
        let [i, j] = holding[..] else { return None };
        let (ci, cj) = (&self.clauses()[i], &self.clauses()[j]);
        if ci.len() != 2 || cj.len() != 2 {
            return None;
        }
        let lv_i = *ci.iter().find(|l| l.var() == v)?;
        let lv_j = *cj.iter().find(|l| l.var() == v)?;
        if lv_i != !lv_j {
            return None;
        }
        let u = ci.iter().find(|l| l.var() != v)?.var();
        let w = cj.iter().find(|l| l.var() != v)?.var();
        (u != w).then_some((i, j, u, w))
    }

    /// The variable the path rule eliminates from `path`, if any.
    fn path_target(&self, path: &CleanPath) -> Option<Var> {
        let pos = self.q.positions();
        match self.kind {
            GraphKind::Primal => {
                let inner: Vec<Var> = path.inner().iter().filter_map(|v| v.as_var()).collect();
                if inner.len() < 2 {
                    return None;
                }
                inner.into_iter().max_by_key(|v| pos[v])
            }
            // Variables whose two path neighbours are inner clause vertices and that
            // have a contraction partner earlier in the prefix.
            GraphKind::Incidence => {
                let verts = &path.vertices;
                (2..verts.len().saturating_sub(2))
                    .filter_map(|i| verts[i].as_var())
                    .filter(|&v| {
                        self.contraction_pattern(v)
                            .is_some_and(|(_, _, u, w)| pos[&u] < pos[&v] || pos[&w] < pos[&v])
                    })
                    .max_by_key(|v| pos[v])
            }
        }
    }

    /// Eliminate `v` by resolution (∃) or by dropping it from both clauses (∀).
    fn contract(&mut self, v: Var) -> Option<Step> {
        let (i, j, _, _) = self.contraction_pattern(v)?;
        let strip = |c: &Clause| -> Clause { c.iter().copied().filter(|l| l.var() != v).collect() };
        let (ci, cj) = (strip(&self.clauses()[i]), strip(&self.clauses()[j]));
        let quant = self.quant(v);
        let clauses = self.clauses_mut();
        clauses.remove(i.max(j));
        clauses.remove(i.min(j));
        match quant {
            Quant::Exists => clauses.push(ci.into_iter().chain(cj).collect()),
            Quant::Forall => {
                clauses.push(ci);
                clauses.push(cj);
            }
        }
        self.q.prefix.retain(|p| p.1 != v);
        Some(Step::Changed(TraceStep::new(Rule::Path).on(v)))
    }

    /// One structural rule application in priority order.
    fn structural(&mut self) -> Step {
        let s = self.structure();
        if self.kind == GraphKind::Primal {
            let edges = Self::clean_var_edges(&s);
            for &(u, v) in &edges {
                if let Some(step) = self.multiplicity_on(u, v) {
                    return step;
                }
            }
            for &(u, v) in &edges {
                if let Some(step) = self.pair_on(u, v) {
                    return step;
                }
            }
            for v in self.q.vars() {
                if let Some(step) = self.leaf_on(&s, v) {
                    return step;
                }
            }
        }
        for path in &s.paths {
            if let Some(step) = self.path_target(path).and_then(|v| self.contract(v)) {
                return step;
            }
        }
        Step::None
    }

    fn is_clean_edge(&self, u: Var, v: Var) -> bool {
        let s = self.structure();
        Self::clean_var_edges(&s)
            .iter()
            .any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
    }
}

/// Result of a single rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Reduced { formula: Qbf, step: TraceStep },
    Decided { value: bool, step: TraceStep },
    NotApplicable,
}

fn start(q: &Qbf, kind: GraphKind) -> Result<Work> {
    if !q.matrix.is_cnf() {
        return Err(Error::pre("the reduction rules need a CNF matrix"));
    }
    Ok(Work { q: q.clone(), kind })
}

fn finish(work: Work, step: Step) -> Outcome {
    match step {
        Step::Changed(step) => Outcome::Reduced {
            formula: work.q,
            step,
        },
        Step::Decided(mut step, value) => {
            step.verdict = Some(value);
            Outcome::Decided { value, step }
        }
        Step::None => Outcome::NotApplicable,
    }
}

/// One unit or pure-literal step. Universal units decide false; pure existentials are
/// satisfied and pure universals falsified; unused variables leave the prefix.
pub fn rule_unit_and_pure(q: &Qbf) -> Result<Outcome> {
    let mut work = start(q, GraphKind::Primal)?;
    let mut step = work.unit();
    if matches!(step, Step::None) {
        step = work.pure();
    }
    Ok(finish(work, step))
}

fn clean_pair(q: &Qbf, u: Var, v: Var) -> Result<Work> {
    let work = start(q, GraphKind::Primal)?;
    if !work.is_clean_edge(u, v) {
        return Err(Error::pre(format!("x{u}-x{v} is not a clean edge")));
    }
    Ok(work)
}

/// Multiplicity rule on a clean primal edge shared by three or four 2-clauses.
pub fn rule_clean_multiplicity(q: &Qbf, u: Var, v: Var) -> Result<Outcome> {
    let mut work = clean_pair(q, u, v)?;
    let step = work
        .multiplicity_on(u, v)
        .ok_or_else(|| Error::pre(format!("x{u}-x{v} lies in fewer than three 2-clauses")))?;
    Ok(finish(work, step))
}

/// Pair rule on a clean primal edge shared by exactly two 2-clauses.
pub fn rule_substitute_pair(q: &Qbf, u: Var, v: Var) -> Result<Outcome> {
    let mut work = clean_pair(q, u, v)?;
    let step = work
        .pair_on(u, v)
        .ok_or_else(|| Error::pre(format!("x{u}-x{v} does not lie in exactly two 2-clauses")))?;
    Ok(finish(work, step))
}

/// Leaf rule on the primal spanning forest; not applicable to endpoints of deleted edges.
pub fn rule_leaf(q: &Qbf, l: Var) -> Result<Outcome> {
    let mut work = start(q, GraphKind::Primal)?;
    let s = work.structure();
    let step = work.leaf_on(&s, l).unwrap_or(Step::None);
    Ok(finish(work, step))
}

/// Path rule on a clean path of the given graph kind.
///
/// Not applicable when the path has too few inner vertices; a precondition error
/// when the chosen variable's clauses do not match the contraction pattern.
pub fn rule_contract_path(q: &Qbf, kind: GraphKind, path: &CleanPath) -> Result<Outcome> {
    let mut work = start(q, kind)?;
    let Some(v) = work.path_target(path) else {
        return Ok(Outcome::NotApplicable);
    };
    let step = work.contract(v).ok_or_else(|| {
        Error::pre(format!(
            "x{v} does not occur in two complementary 2-clauses"
        ))
    })?;
    Ok(finish(work, step))
}

/// Apply the reduction rules to exhaustion: dedup, unit, pure, then on the current
/// clean structure multiplicity, pair substitution, leaf and path contraction.
pub fn kernelize(q: &Qbf, kind: GraphKind) -> Result<KernelResult> {
    let mut work = start(q, kind)?;
    let g = build_graph(q, kind);
    let mut stats = KernelStats {
        k: min_fes(&g).len(),
        input_vars: q.prefix.len(),
        input_clauses: q.clauses().len(),
        ..KernelStats::default()
    };
    let mut trace = Vec::new();
    let verdict = loop {
        if work.clauses().iter().any(Vec::is_empty) {
            break Some(false);
        }
        if work.clauses().is_empty() {
            break Some(true);
        }
        let mut step = work.dedup();
        if matches!(step, Step::None) {
            step = work.unit();
        }
        if matches!(step, Step::None) {
            step = work.pure();
        }
        if matches!(step, Step::None) {
            step = work.structural();
        }
        match step {
            Step::Changed(t) => trace.push(t),
            Step::Decided(mut t, value) => {
                t.verdict = Some(value);
                trace.push(t);
                break Some(value);
            }
            Step::None => break None,
        }
    };
    let kernel = match verdict {
        Some(v) => constant(v),
        None => work.q,
    };
    stats.kernel_vars = kernel.prefix.len();
    stats.kernel_clauses = kernel.clauses().len();
    Ok(KernelResult {
        kernel,
        verdict,
        trace,
        stats,
    })
}

/// Residual checks on a kernel: no unit clause, no pure literal, every clean edge
/// in exactly one clause, and the clean-path inner-vertex bound. Returns the
/// first failed property.
pub fn check_reduced(kernel: &Qbf, kind: GraphKind) -> std::result::Result<(), String> {
    let work = Work {
        q: kernel.clone(),
        kind,
    };
    if let Some(c) = work.clauses().iter().find(|c| c.len() == 1) {
        return Err(format!("unit clause {c:?}"));
    }
    let mut polarity: BTreeMap<Var, (bool, bool)> = BTreeMap::new();
    for l in work.clauses().iter().flatten() {
        let e = polarity.entry(l.var()).or_default();
        if l.is_positive() {
            e.0 = true;
        } else {
            e.1 = true;
        }
    }
    for &(_, v) in &kernel.prefix {
        match polarity.get(&v) {
            Some((true, true)) => {}
            _ => return Err(format!("variable {v} is pure or unused")),
        }
    }
    let s = work.structure();
    if kind == GraphKind::Primal {
        for (u, v) in Work::clean_var_edges(&s) {
            let n = work.pair_clauses(u, v).len();
            if n != 1 {
                return Err(format!("clean edge x{u}-x{v} lies in {n} clauses"));
            }
        }
    }
    let limit = match kind {
        GraphKind::Primal => 2,
        GraphKind::Incidence => 5,
    };
    if let Some(p) = s.paths.iter().find(|p| p.inner().len() > limit) {
        let inner: Vec<String> = p.inner().iter().map(Vertex::to_string).collect();
        return Err(format!(
            "clean path with inner vertices {}",
            inner.join(",")
        ));
    }
    Ok(())
}
