//! Batch equivalence checking of every transformation against the brute-force
//! oracle, with greedy shrinking of failing instances.
//!
//! A run is fully determined by its seed: instance `i` uses the `i`-th value drawn
//! from a ChaCha stream of the run seed, so results do not depend on the thread count.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{
    eliminate_innermost, evaluate_with_budget, negate, restrict, serialize, Assignment, Format,
    Lit, Matrix, Orientation, Qbf, Quant, Var,
};
use crate::gen::{check_witness, generate, GenSpec, Planted, Witness};
use crate::graphs::{
    build_graph, min_degree_decomposition, min_fes, validate_td, validate_treedepth, GraphKind,
    Vertex,
};
use crate::kernel::{check_reduced, incidence_size_bound, kernelize, primal_var_bound};
use crate::saw::{
    bits_for, cdnf_to_cnf_via_td, extend_treedepth, fold_1dnf_into_clause, normalize_3dnf,
    saw_reduce_fvs, saw_reduce_treedepth,
};
use crate::solvers::{check_deletion_set, expand_universal_deletions, solve, Strategy};

/// A transformation under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    Restrict,
    Negate,
    Eliminate,
    KernelPrimal,
    KernelIncidence,
    SawFvs,
    SawTd,
    TdCnf,
    Fold,
    Expand,
    Solve(Strategy),
}

impl Transform {
    pub fn all() -> Vec<Transform> {
        let mut out = vec![
            Transform::Restrict,
            Transform::Negate,
            Transform::Eliminate,
            Transform::KernelPrimal,
            Transform::KernelIncidence,
            Transform::SawFvs,
            Transform::SawTd,
            Transform::TdCnf,
            Transform::Fold,
            Transform::Expand,
        ];
        out.extend(Strategy::ALL.into_iter().map(Transform::Solve));
        out
    }

    pub fn name(self) -> String {
        match self {
            Transform::Restrict => "restrict".into(),
            Transform::Negate => "negate".into(),
            Transform::Eliminate => "eliminate".into(),
            Transform::KernelPrimal => "kernel-primal".into(),
            Transform::KernelIncidence => "kernel-incidence".into(),
            Transform::SawFvs => "saw-fvs".into(),
            Transform::SawTd => "saw-td".into(),
            Transform::TdCnf => "td-cnf".into(),
            Transform::Fold => "fold".into(),
            Transform::Expand => "expand".into(),
            Transform::Solve(s) => format!("solve-{}", s.name()),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Transform::all()
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::pre(format!("unknown transformation {s}")))
    }
}

/// An instance together with the structure the transformation relies on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub formula: Qbf,
    pub witness: Option<Witness>,
}

/// Result of checking one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// The oracle could not decide within the budget.
    Skip(String),
    Fail(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub instance_seed: u64,
    pub message: String,
    pub original: Case,
    pub reproducer: Case,
    /// The reproducer in qcdnf text form.
    pub reproducer_text: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub transform: String,
    pub seed: u64,
    pub count: usize,
    pub passed: usize,
    pub skipped: usize,
    /// The failing instance with the smallest index, shrunk.
    pub failure: Option<Failure>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub count: usize,
    /// Oracle variable budget. Reduction outputs carry many auxiliary variables,
    /// so callers usually pass more than the evaluation default.
    pub budget: usize,
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
}

/// Largest solver test instance.
const SOLVER_INSTANCE_VARS: usize = 12;

/// Oracle budget used by batch verification unless the caller overrides it.
pub const VERIFY_VAR_BUDGET: usize = 64;

/// Per-instance seeds of a run.
pub fn instance_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(7);
    (0..count).map(|_| r.gen()).collect()
}

/// Generate, check and, on failure, shrink `count` instances.
pub fn run_verify(t: Transform, opts: VerifyOptions) -> Result<VerifyReport> {
    let seeds = instance_seeds(opts.seed, opts.count);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::pre(format!("cannot start worker threads: {e}")))?;
    let results: Vec<Result<(Case, Outcome)>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| {
                let case = instance(t, s)?;
                let outcome = check(t, &case, opts.budget);
                Ok((case, outcome))
            })
            .collect()
    });
    let mut report = VerifyReport {
        transform: t.name(),
        seed: opts.seed,
        count: opts.count,
        passed: 0,
        skipped: 0,
        failure: None,
    };
    for (index, result) in results.into_iter().enumerate() {
        let (case, outcome) = result?;
        match outcome {
            Outcome::Pass => report.passed += 1,
            Outcome::Skip(_) => report.skipped += 1,
            Outcome::Fail(message) => {
                let reproducer = shrink(&case, |c| {
                    matches!(check(t, c, opts.budget), Outcome::Fail(_))
                });
                let reproducer_text = serialize(&reproducer.formula, Format::Qcdnf)?;
                report.failure = Some(Failure {
                    index,
                    instance_seed: seeds[index],
                    message,
                    original: case,
                    reproducer,
                    reproducer_text,
                });
                break;
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------- instances

fn gen_case(spec: GenSpec) -> Result<Case> {
    let g = generate(&spec)?;
    Ok(Case {
        formula: g.formula,
        witness: Some(g.witness),
    })
}

fn sparse_fvs_spec(r: &mut ChaCha8Rng, seed: u64, max_vars: usize, max_clauses: usize) -> GenSpec {
    let vars = r.gen_range(3..=max_vars);
    GenSpec {
        vars,
        depth: r.gen_range(1..=3),
        width: 3,
        clauses: Some(r.gen_range(1..=max_clauses)),
        planted: Planted::SparseFvs {
            k: r.gen_range(1..=3.min(vars)),
        },
        seed,
    }
}

/// Attach a DNF part of random terms, oriented to match the innermost block.
fn with_terms(r: &mut ChaCha8Rng, q: &Qbf, terms: usize, width: usize) -> Qbf {
    let vars = q.vars();
    let dnf: Vec<Vec<Lit>> = (0..terms)
        .map(|_| {
            let mut term: Vec<Lit> = Vec::new();
            for _ in 0..r.gen_range(1..=width) {
                let v = vars[r.gen_range(0..vars.len())];
                if !term.iter().any(|l| l.var() == v) {
                    term.push(Lit::new(v, r.gen_bool(0.5)));
                }
            }
            term
        })
        .collect();
    let orientation = Orientation::for_innermost(q.innermost().unwrap_or(Quant::Exists));
    let matrix = Matrix::Cdnf {
        cnf: q.clauses().to_vec(),
        dnf,
        orientation,
    };
    Qbf {
        num_vars: q.num_vars,
        prefix: q.prefix.clone(),
        matrix,
    }
}

/// The planted instance for instance seed `seed`.
pub fn instance(t: Transform, seed: u64) -> Result<Case> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let case = match t {
        Transform::Restrict | Transform::Negate => {
            let base = gen_case(sparse_fvs_spec(&mut r, seed, 10, 14))?.formula;
            let formula = match r.gen_range(0..3) {
                0 => base,
                1 => negate(&base),
                _ => {
                    let terms = r.gen_range(0..=3);
                    with_terms(&mut r, &base, terms, 2)
                }
            };
            Case {
                formula,
                witness: None,
            }
        }
        Transform::Eliminate => Case {
            formula: gen_case(sparse_fvs_spec(&mut r, seed, 10, 14))?.formula,
            witness: None,
        },
        Transform::KernelPrimal | Transform::KernelIncidence => {
            let vars = r.gen_range(2..=12);
            let room = vars * (vars - 1) / 2 - (vars - 1);
            let k = r.gen_range(0..=room.min(4));
            gen_case(GenSpec {
                vars,
                depth: r.gen_range(1..=3),
                width: 2,
                clauses: None,
                planted: Planted::Fes { k },
                seed,
            })?
        }
        Transform::SawFvs => {
            let mut case = gen_case(sparse_fvs_spec(&mut r, seed, 7, 4))?;
            if case.formula.innermost() == Some(Quant::Forall) {
                // A CNF needs an existential innermost block; flipping every quantifier keeps the blocks.
                for p in &mut case.formula.prefix {
                    p.0 = p.0.flip();
                }
            }
            let terms = r.gen_range(0..=2);
            let extended = with_terms(&mut r, &case.formula, terms, 1);
            let witness = case.witness.as_ref().expect("planted");
            if check_witness(&extended, witness).is_ok() {
                case.formula = extended;
            }
            case
        }
        Transform::SawTd | Transform::TdCnf | Transform::Fold => {
            // Longer main paths make the reduced formula too large for brute force.
            let longest = if t == Transform::SawTd { 2 } else { 3 };
            let (h, hung, path_vars) = (
                r.gen_range(1..=longest),
                r.gen_range(0..=2),
                r.gen_range(0..=2),
            );
            let mut case = gen_case(GenSpec {
                vars: h + hung + path_vars,
                depth: r.gen_range(1..=3),
                width: 3,
                clauses: Some(r.gen_range(1..=5)),
                planted: Planted::AlphaTd { h, hung, path_vars },
                seed,
            })?;
            if t == Transform::TdCnf && r.gen_bool(0.3) {
                // Wider terms exercise the distribution over bags.
                if let Matrix::Cdnf { dnf, .. } = &mut case.formula.matrix {
                    let vars = case.formula.prefix.iter().map(|p| p.1).collect::<Vec<_>>();
                    dnf.push(
                        vars.iter()
                            .take(2)
                            .map(|&v| Lit::new(v, r.gen_bool(0.5)))
                            .collect(),
                    );
                }
            }
            if t == Transform::Fold && r.gen_bool(0.5) {
                case.formula = negate(&case.formula);
            }
            if t != Transform::SawTd {
                case.witness = None;
            }
            case
        }
        Transform::Expand => {
            let k = r.gen_range(1..=2);
            gen_case(GenSpec {
                vars: 7,
                depth: 3,
                width: 3,
                clauses: None,
                planted: Planted::CDeletion { k, c: 2 },
                seed,
            })?
        }
        Transform::Solve(strategy) => {
            let planted = match strategy {
                Strategy::SingleDel => Planted::SingleDel {
                    c: r.gen_range(2..=4),
                },
                Strategy::E1a => Planted::E1a {
                    k: r.gen_range(1..=2),
                    c: r.gen_range(1..=2),
                },
                Strategy::UniComplete => Planted::UniComplete {
                    k: r.gen_range(1..=2),
                    c: 2,
                },
                _ => match r.gen_range(0..3) {
                    0 => Planted::SingleDel { c: 3 },
                    1 => Planted::E1a { k: 2, c: 2 },
                    _ => Planted::CDeletion { k: 2, c: 2 },
                },
            };
            // The generator rounds sizes up to whole templates; shrink the request until it fits.
            let mut vars = if strategy == Strategy::UniComplete {
                10
            } else {
                9
            };
            loop {
                let spec = GenSpec {
                    vars,
                    depth: 3,
                    width: 3,
                    clauses: None,
                    planted,
                    seed,
                };
                let case = gen_case(spec)?;
                if case.formula.prefix.len() <= SOLVER_INSTANCE_VARS || vars <= 2 {
                    break case;
                }
                vars -= 1;
            }
        }
    };
    Ok(case)
}

// ---------------------------------------------------------------- checks

fn oracle(q: &Qbf, budget: usize) -> std::result::Result<bool, Outcome> {
    evaluate_with_budget(q, budget).map_err(|e| match e {
        Error::VarBudget { .. } => Outcome::Skip(e.to_string()),
        e => Outcome::Fail(format!("oracle failed: {e}")),
    })
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Outcome::Fail(format!($($msg)+));
        }
    };
}

macro_rules! attempt {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Outcome::Fail(format!("transformation failed: {e}")),
        }
    };
}

macro_rules! value {
    ($q:expr, $budget:expr) => {
        match oracle($q, $budget) {
            Ok(v) => v,
            Err(o) => return o,
        }
    };
}

fn witness_set(case: &Case) -> BTreeSet<Var> {
    match &case.witness {
        Some(Witness::SparseFvs { set }) | Some(Witness::DeletionSet { set, .. }) => {
            set.iter().copied().collect()
        }
        _ => BTreeSet::new(),
    }
}

fn witness_c(case: &Case) -> Option<usize> {
    match &case.witness {
        Some(Witness::DeletionSet { c, .. }) => Some(*c),
        _ => None,
    }
}

/// Run the transformation on one instance and compare with the oracle.
pub fn check(t: Transform, case: &Case, budget: usize) -> Outcome {
    let q = &case.formula;
    match t {
        Transform::Restrict => {
            let Some(&(quant, v)) = q.prefix.first() else {
                return Outcome::Pass;
            };
            let whole = value!(q, budget);
            let low = value!(&restrict(q, &Assignment::from_bits(&[v], 0)), budget);
            let high = value!(&restrict(q, &Assignment::from_bits(&[v], 1)), budget);
            let combined = if quant == Quant::Exists {
                low || high
            } else {
                low && high
            };
            ensure!(
                whole == combined,
                "value {whole} but the restrictions to x{v} combine to {combined}"
            );
            let vars = q.vars();
            let (alpha, beta) = vars.split_at(vars.len() / 2);
            let a = Assignment::from_bits(alpha, 0b1010_1010);
            let b = Assignment::from_bits(beta, 0b0110_0110);
            ensure!(
                restrict(&restrict(q, &a), &b) == restrict(q, &a.union(&b)),
                "successive restrictions differ from the joint restriction"
            );
            Outcome::Pass
        }
        Transform::Negate => {
            let value = value!(q, budget);
            let dual = negate(q);
            ensure!(
                value!(&dual, budget) == !value,
                "the dual has the same value {value}"
            );
            ensure!(negate(&dual) == *q, "negating twice changes the formula");
            Outcome::Pass
        }
        Transform::Eliminate => {
            let Some(&(_, v)) = q.prefix.last() else {
                return Outcome::Pass;
            };
            let out = attempt!(eliminate_innermost(q, v));
            let (before, after) = (value!(q, budget), value!(&out, budget));
            ensure!(
                before == after,
                "eliminating x{v} changes the value from {before} to {after}"
            );
            Outcome::Pass
        }
        Transform::KernelPrimal | Transform::KernelIncidence => {
            let kind = if t == Transform::KernelPrimal {
                GraphKind::Primal
            } else {
                GraphKind::Incidence
            };
            let res = attempt!(kernelize(q, kind));
            let value = value!(q, budget);
            let kernel_value = value!(&res.kernel, budget);
            ensure!(
                value == kernel_value,
                "kernel value {kernel_value}, input value {value}"
            );
            if let Some(v) = res.verdict {
                ensure!(v == value, "kernel verdict {v}, input value {value}");
            } else if let Err(msg) = check_reduced(&res.kernel, kind) {
                return Outcome::Fail(format!("kernel is not reduced: {msg}"));
            }
            let k = res.stats.k;
            match kind {
                GraphKind::Primal => ensure!(
                    res.stats.kernel_vars <= primal_var_bound(k),
                    "{} kernel variables exceed the bound for k = {k}",
                    res.stats.kernel_vars
                ),
                GraphKind::Incidence => ensure!(
                    res.stats.kernel_vars + res.stats.kernel_clauses <= incidence_size_bound(k),
                    "kernel size {} exceeds the bound for k = {k}",
                    res.stats.kernel_vars + res.stats.kernel_clauses
                ),
            }
            Outcome::Pass
        }
        Transform::SawFvs => {
            let source = witness_set(case);
            let (out, s_prime, _) = attempt!(saw_reduce_fvs(q, &source));
            ensure!(
                s_prime.len() == 3 * bits_for(source.len()) + 4,
                "new set has {} variables for a source of {}",
                s_prime.len(),
                source.len()
            );
            let (norm, _) = attempt!(normalize_3dnf(&out));
            ensure!(
                norm.terms().iter().all(|term| term.len() <= 3),
                "normalized terms are wider than 3"
            );
            let w = Witness::SparseFvs { set: s_prime };
            if let Err(msg) = check_witness(&norm, &w) {
                return Outcome::Fail(format!("output set is not a sparse FVS: {msg}"));
            }
            let (before, after) = (value!(q, budget), value!(&norm, budget));
            ensure!(
                before == after,
                "reduction changes the value from {before} to {after}"
            );
            Outcome::Pass
        }
        Transform::SawTd => {
            let Some(Witness::AlphaTd { decomposition }) = &case.witness else {
                return Outcome::Fail("missing decomposition".into());
            };
            let (out, td, _) = attempt!(saw_reduce_treedepth(q, decomposition));
            let report = validate_treedepth(&build_graph(&out, GraphKind::Primal), &td);
            ensure!(
                report.valid,
                "output decomposition is invalid: {}",
                report.violations.join("; ")
            );
            let (norm, chains) = attempt!(normalize_3dnf(&out));
            let extended = extend_treedepth(&td, &chains);
            let report = validate_treedepth(&build_graph(&norm, GraphKind::Primal), &extended);
            ensure!(
                report.valid,
                "normalized decomposition is invalid: {}",
                report.violations.join("; ")
            );
            let (before, after) = (value!(q, budget), value!(&norm, budget));
            ensure!(
                before == after,
                "reduction changes the value from {before} to {after}"
            );
            Outcome::Pass
        }
        Transform::TdCnf => {
            let g = build_graph(q, GraphKind::Primal);
            let td = min_degree_decomposition(&g);
            ensure!(
                validate_td(&g, &td).valid,
                "heuristic decomposition is invalid"
            );
            let (cnf, td2) = attempt!(cdnf_to_cnf_via_td(q, &td));
            ensure!(cnf.matrix.is_cnf(), "output is not a CNF");
            let report = validate_td(&build_graph(&cnf, GraphKind::Primal), &td2);
            ensure!(
                report.valid,
                "output decomposition is invalid: {}",
                report.violations.join("; ")
            );
            ensure!(
                td2.width() <= td.width() + 3,
                "width grows from {} to {}",
                td.width(),
                td2.width()
            );
            let (before, after) = (value!(q, budget), value!(&cnf, budget));
            ensure!(
                before == after,
                "encoding changes the value from {before} to {after}"
            );
            Outcome::Pass
        }
        Transform::Fold => {
            let folded = attempt!(fold_1dnf_into_clause(q));
            let (before, after) = (value!(q, budget), value!(&folded, budget));
            ensure!(
                before == after,
                "folding changes the value from {before} to {after}"
            );
            Outcome::Pass
        }
        Transform::Expand => {
            let d = witness_set(case);
            let exp = attempt!(expand_universal_deletions(q, &d));
            ensure!(
                exp.deletion_set
                    .iter()
                    .all(|&v| exp.formula.quant_of(v) == Some(Quant::Exists)),
                "the expanded deletion set keeps a universal"
            );
            if let Err(e) =
                check_deletion_set(&exp.formula, &exp.deletion_set, Some(exp.component_limit()))
            {
                return Outcome::Fail(format!("expanded deletion set: {e}"));
            }
            let (before, after) = (value!(q, budget), value!(&exp.formula, budget));
            ensure!(
                before == after,
                "expansion changes the value from {before} to {after}"
            );
            Outcome::Pass
        }
        Transform::Solve(strategy) => {
            let d = witness_set(case);
            let report = attempt!(solve(q, strategy, Some(&d), witness_c(case)));
            let value = value!(q, budget);
            ensure!(
                report.value == value,
                "solver says {}, oracle says {value}",
                report.value
            );
            Outcome::Pass
        }
    }
}

// ---------------------------------------------------------------- shrinking

fn map_sets(m: &Matrix, f: impl Fn(&[Vec<Lit>]) -> Vec<Vec<Lit>>) -> Matrix {
    match m {
        Matrix::Cnf(c) => Matrix::Cnf(f(c)),
        Matrix::Dnf(d) => Matrix::Dnf(f(d)),
        Matrix::Cdnf {
            cnf,
            dnf,
            orientation,
        } => Matrix::Cdnf {
            cnf: f(cnf),
            dnf: f(dnf),
            orientation: *orientation,
        },
    }
}

/// Drop variable `v` from the prefix and every clause and term; sets left empty disappear.
fn without_var(case: &Case, v: Var) -> Option<Case> {
    let witness = match &case.witness {
        None => None,
        Some(Witness::AlphaTd { .. }) => return None,
        Some(Witness::SparseFvs { set }) => Some(Witness::SparseFvs {
            set: set.iter().copied().filter(|&x| x != v).collect(),
        }),
        Some(Witness::DeletionSet { set, c }) => Some(Witness::DeletionSet {
            set: set.iter().copied().filter(|&x| x != v).collect(),
            c: *c,
        }),
        Some(Witness::Fes { .. }) => None,
    };
    let matrix = map_sets(&case.formula.matrix, |sets| {
        sets.iter()
            .map(|s| {
                s.iter()
                    .copied()
                    .filter(|l| l.var() != v)
                    .collect::<Vec<_>>()
            })
            .filter(|s| !s.is_empty())
            .collect()
    });
    let prefix = case
        .formula
        .prefix
        .iter()
        .copied()
        .filter(|p| p.1 != v)
        .collect();
    let formula = Qbf {
        num_vars: case.formula.num_vars,
        prefix,
        matrix,
    };
    let witness = match &case.witness {
        Some(Witness::Fes { .. }) => Some(fes_witness(&formula)),
        _ => witness,
    };
    Some(Case { formula, witness })
}

fn fes_witness(q: &Qbf) -> Witness {
    let edges = min_fes(&build_graph(q, GraphKind::Primal))
        .into_iter()
        .filter_map(|(a, b)| match (a, b) {
            (Vertex::Var(x), Vertex::Var(y)) => Some((x.min(y), x.max(y))),
            _ => None,
        })
        .collect();
    Witness::Fes { edges }
}

/// Drop the `i`-th set of the matrix, clauses first, then terms.
fn without_set(case: &Case, i: usize) -> Option<Case> {
    let mut formula = case.formula.clone();
    let n_clauses = formula.clauses().len();
    match &mut formula.matrix {
        Matrix::Cnf(c) | Matrix::Dnf(c) => {
            if i >= c.len() {
                return None;
            }
            c.remove(i);
        }
        Matrix::Cdnf { cnf, dnf, .. } => {
            if i < n_clauses {
                cnf.remove(i);
            } else if i - n_clauses < dnf.len() {
                dnf.remove(i - n_clauses);
            } else {
                return None;
            }
        }
    }
    let witness = match &case.witness {
        Some(Witness::Fes { .. }) => Some(fes_witness(&formula)),
        w => w.clone(),
    };
    Some(Case { formula, witness })
}

fn set_count(q: &Qbf) -> usize {
    match &q.matrix {
        Matrix::Cdnf { cnf, dnf, .. } => cnf.len() + dnf.len(),
        m => m.clauses().len() + m.terms().len(),
    }
}

fn admissible(c: &Case) -> bool {
    c.formula.validate().is_ok()
        && c.witness
            .as_ref()
            .is_none_or(|w| check_witness(&c.formula, w).is_ok())
}

/// Greedy deletion of variables, then clauses and terms, keeping each deletion
/// under which `fails` still holds and the witness stays valid; repeats until no
/// single deletion is kept.
pub fn shrink(case: &Case, fails: impl Fn(&Case) -> bool) -> Case {
    let mut best = case.clone();
    loop {
        let mut progress = false;
        for v in best.formula.vars() {
            if let Some(c) = without_var(&best, v) {
                if admissible(&c) && fails(&c) {
                    best = c;
                    progress = true;
                }
            }
        }
        let mut i = 0;
        while i < set_count(&best.formula) {
            match without_set(&best, i) {
                Some(c) if admissible(&c) && fails(&c) => {
                    best = c;
                    progress = true;
                }
                _ => i += 1,
            }
        }
        if !progress {
            return best;
        }
    }
}
