//! Seeded random instances with planted structure.
//!
//! All randomness comes from one seed. Independent concerns draw from separate
//! ChaCha streams of that seed: stream 0 shapes the structure, stream 1 picks
//! literal signs and stream 2 picks quantifiers and prefix order, so changing how
//! signs are drawn never shifts the structure.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Clause, Lit, Matrix, Orientation, Qbf, Quant, Var};
use crate::graphs::{
    build_graph, edge, is_deletion_set, min_fes, validate_alpha_td, vertex_set, AlphaTd,
    DeletionKind, GraphKind, TreedepthDecomposition, Vertex,
};
use crate::solvers::{check_deletion_set, component_types};

/// The structure to plant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Planted {
    /// A sparse feedback vertex set of `k` variables.
    SparseFvs { k: usize },
    /// A primal graph with feedback edge number `k`, all clauses binary.
    Fes { k: usize },
    /// A `c`-deletion set of `k` variables.
    CDeletion { k: usize, c: usize },
    /// One existential deletion variable with components of at most `c` variables.
    SingleDel { c: usize },
    /// `k` deletion variables leaving components of the form `∃≤1∀` with at most
    /// `c` variables, several copies per type.
    E1a { k: usize, c: usize },
    /// `k` existential deletion variables, every component type repeated at least `2^k` times.
    UniComplete { k: usize, c: usize },
    /// An α-treedepth decomposition with a main path of `h` vertices, `hung` tree
    /// vertices and `path_vars` leaf-path vertices; α is the quantifier depth.
    AlphaTd {
        h: usize,
        hung: usize,
        path_vars: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    /// Target number of variables. Replicated shapes round it up to whole copies.
    pub vars: usize,
    /// Quantifier depth, for shapes that do not fix the prefix themselves.
    pub depth: usize,
    /// Maximum clause width.
    pub width: usize,
    /// Clause count, for shapes that do not fix it themselves.
    pub clauses: Option<usize>,
    pub planted: Planted,
    pub seed: u64,
}

/// The planted structure of a generated instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    SparseFvs { set: Vec<Var> },
    Fes { edges: Vec<(Var, Var)> },
    DeletionSet { set: Vec<Var>, c: usize },
    AlphaTd { decomposition: AlphaTd },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generated {
    pub formula: Qbf,
    pub witness: Witness,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

struct Streams {
    shape: ChaCha8Rng,
    signs: ChaCha8Rng,
    prefix: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        Streams {
            shape: stream(seed, 0),
            signs: stream(seed, 1),
            prefix: stream(seed, 2),
        }
    }

    fn lits(&mut self, vars: &[Var]) -> Clause {
        vars.iter()
            .map(|&v| Lit::new(v, self.signs.gen_bool(0.5)))
            .collect()
    }
}

/// Split `order` into `depth` nonempty blocks of alternating quantifiers, the
/// innermost one being `innermost` when given.
fn block_prefix(
    r: &mut impl Rng,
    order: &[Var],
    depth: usize,
    innermost: Option<Quant>,
) -> Vec<(Quant, Var)> {
    let n = order.len();
    if n == 0 {
        return vec![];
    }
    let depth = depth.clamp(1, n);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(r);
    let mut cuts: Vec<usize> = cuts.into_iter().take(depth - 1).collect();
    cuts.sort_unstable();
    let last = innermost.unwrap_or(if r.gen_bool(0.5) {
        Quant::Exists
    } else {
        Quant::Forall
    });
    let first = if depth % 2 == 1 { last } else { last.flip() };
    let mut quant = first;
    let mut out = Vec::with_capacity(n);
    let mut next_cut = cuts.into_iter().peekable();
    for (i, &v) in order.iter().enumerate() {
        if next_cut.peek() == Some(&i) {
            next_cut.next();
            quant = quant.flip();
        }
        out.push((quant, v));
    }
    out
}

fn consistent(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::pre(format!("inconsistent generator spec: {msg}")))
    }
}

/// Generate an instance; the same spec always yields the same instance.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    consistent(spec.vars >= 1, "at least one variable is needed")?;
    consistent(spec.width >= 2, "clause width must be at least 2")?;
    let mut s = Streams::new(spec.seed);
    let out = match spec.planted {
        Planted::SparseFvs { k } => sparse_fvs(spec, k, &mut s)?,
        Planted::Fes { k } => fes(spec, k, &mut s)?,
        Planted::CDeletion { k, c } => deletion(spec, k, c, Shape::Any, &mut s)?,
        Planted::SingleDel { c } => deletion(spec, 1, c, Shape::SingleDeletion, &mut s)?,
        Planted::E1a { k, c } => deletion(spec, k, c, Shape::ExistsLe1Forall, &mut s)?,
        Planted::UniComplete { k, c } => deletion(spec, k, c, Shape::UniversallyComplete, &mut s)?,
        Planted::AlphaTd { h, hung, path_vars } => alpha_td(spec, h, hung, path_vars, &mut s)?,
    };
    if let Err(msg) = check_witness(&out.formula, &out.witness) {
        return Err(Error::pre(format!(
            "generated witness failed validation: {msg}"
        )));
    }
    if let (Planted::UniComplete { .. }, Witness::DeletionSet { set, .. }) =
        (spec.planted, &out.witness)
    {
        if !is_universally_complete(&out.formula, &set.iter().copied().collect())? {
            return Err(Error::pre(
                "generated deletion set is not universally complete",
            ));
        }
    }
    Ok(out)
}

fn sparse_fvs(spec: &GenSpec, k: usize, s: &mut Streams) -> Result<Generated> {
    let n = spec.vars;
    consistent(k <= n, "the FVS cannot exceed the variable count")?;
    let mut vars: Vec<Var> = (1..=n as Var).collect();
    vars.shuffle(&mut s.shape);
    let (set, rest) = vars.split_at(k);
    let mut edges: Vec<(Var, Var)> = Vec::new();
    for (i, &v) in rest.iter().enumerate().skip(1) {
        if s.shape.gen_bool(0.7) {
            edges.push((rest[s.shape.gen_range(0..i)], v));
        }
    }
    edges.shuffle(&mut s.shape);
    let m = spec.clauses.unwrap_or(2 * n);
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let mut chosen: Vec<Var> = Vec::new();
        match s.shape.gen_range(0..3) {
            2 => chosen.extend(edges.pop().map(|(a, b)| [a, b]).into_iter().flatten()),
            1 if !rest.is_empty() => chosen.push(*rest.choose(&mut s.shape).expect("nonempty")),
            _ => {}
        }
        let mut pool = set.to_vec();
        pool.shuffle(&mut s.shape);
        while chosen.len() < spec.width
            && !pool.is_empty()
            && (chosen.is_empty() || s.shape.gen_bool(0.5))
        {
            chosen.push(pool.pop().expect("nonempty"));
        }
        if !chosen.is_empty() {
            clauses.push(s.lits(&chosen));
        }
    }
    let mut order: Vec<Var> = (1..=n as Var).collect();
    order.shuffle(&mut s.prefix);
    let prefix = block_prefix(&mut s.prefix, &order, spec.depth, None);
    let mut set = set.to_vec();
    set.sort_unstable();
    Ok(Generated {
        formula: Qbf::new(n as Var, prefix, Matrix::Cnf(clauses))?,
        witness: Witness::SparseFvs { set },
    })
}

fn fes(spec: &GenSpec, k: usize, s: &mut Streams) -> Result<Generated> {
    let n = spec.vars;
    let room = n * (n - 1) / 2 - (n - 1);
    consistent(k <= room, "too many feedback edges for the variable count")?;
    let mut tree: BTreeSet<(Var, Var)> = BTreeSet::new();
    for v in 2..=n as Var {
        let p = s.shape.gen_range(1..v);
        tree.insert((p, v));
    }
    let mut others: Vec<(Var, Var)> = (1..=n as Var)
        .flat_map(|a| (a + 1..=n as Var).map(move |b| (a, b)))
        .filter(|e| !tree.contains(e))
        .collect();
    others.shuffle(&mut s.shape);
    let mut extra: Vec<(Var, Var)> = others.into_iter().take(k).collect();
    extra.sort_unstable();
    let mut clauses = Vec::new();
    for &(a, b) in tree.iter().chain(&extra) {
        for _ in 0..s.shape.gen_range(1..=2) {
            clauses.push(s.lits(&[a, b]));
        }
    }
    clauses.shuffle(&mut s.shape);
    let mut order: Vec<Var> = (1..=n as Var).collect();
    order.shuffle(&mut s.prefix);
    let prefix = block_prefix(&mut s.prefix, &order, spec.depth, None);
    Ok(Generated {
        formula: Qbf::new(n as Var, prefix, Matrix::Cnf(clauses))?,
        witness: Witness::Fes { edges: extra },
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Any,
    SingleDeletion,
    ExistsLe1Forall,
    UniversallyComplete,
}

#[derive(Clone, Copy)]
enum Slot {
    Local(usize),
    Deleted(usize),
}

/// One component shape: quantifiers, the deletion-variable gap each variable sits
/// in (non-decreasing) and clauses over local and deletion slots.
struct Template {
    quants: Vec<Quant>,
    gaps: Vec<usize>,
    clauses: Vec<Vec<Slot>>,
}

fn random_template(
    r: &mut impl Rng,
    size: usize,
    k: usize,
    width: usize,
    shape: Shape,
) -> Template {
    let quants: Vec<Quant> = match shape {
        Shape::ExistsLe1Forall => {
            let lead = r.gen_bool(0.7);
            (0..size)
                .map(|i| {
                    if i == 0 && lead {
                        Quant::Exists
                    } else {
                        Quant::Forall
                    }
                })
                .collect()
        }
        _ => (0..size)
            .map(|_| {
                if r.gen_bool(0.5) {
                    Quant::Exists
                } else {
                    Quant::Forall
                }
            })
            .collect(),
    };
    let mut gaps: Vec<usize> = (0..size).map(|_| r.gen_range(0..=k)).collect();
    gaps.sort_unstable();
    let mut clauses: Vec<Vec<Slot>> = Vec::new();
    for i in 1..size {
        let mut c = vec![Slot::Local(i - 1), Slot::Local(i)];
        c.extend(deleted_slots(r, k, width - 2));
        clauses.push(c);
    }
    for _ in 0..r.gen_range(1..=size + 1) {
        let mut locals: Vec<usize> = (0..size).collect();
        locals.shuffle(r);
        let take = r.gen_range(1..=size.min(width));
        let mut c: Vec<Slot> = locals.into_iter().take(take).map(Slot::Local).collect();
        c.extend(deleted_slots(r, k, width - take));
        clauses.push(c);
    }
    Template {
        quants,
        gaps,
        clauses,
    }
}

/// Up to `room` distinct deletion slots.
fn deleted_slots(r: &mut impl Rng, k: usize, room: usize) -> Vec<Slot> {
    let mut ds: Vec<usize> = (0..k).collect();
    ds.shuffle(r);
    let take = if room == 0 {
        0
    } else {
        r.gen_range(0..=room.min(k))
    };
    ds.into_iter().take(take).map(Slot::Deleted).collect()
}

fn deletion(
    spec: &GenSpec,
    k: usize,
    c: usize,
    shape: Shape,
    s: &mut Streams,
) -> Result<Generated> {
    consistent(c >= 1, "components need at least one variable")?;
    consistent(k < 20, "deletion sets are limited to 19 variables")?;
    consistent(spec.vars > k, "the deletion set must leave variables over")?;
    let d: Vec<Var> = (1..=k as Var).collect();
    let d_quant: Vec<Quant> = (0..k)
        .map(|_| match shape {
            Shape::UniversallyComplete => Quant::Exists,
            Shape::SingleDeletion => {
                if s.prefix.gen_bool(0.85) {
                    Quant::Exists
                } else {
                    Quant::Forall
                }
            }
            _ => {
                if s.prefix.gen_bool(0.5) {
                    Quant::Exists
                } else {
                    Quant::Forall
                }
            }
        })
        .collect();

    let mut next: Var = k as Var;
    let mut quant_of: BTreeMap<Var, Quant> =
        d.iter().copied().zip(d_quant.iter().copied()).collect();
    // Per gap, the variable sequences of the components placed there.
    let mut gap_runs: Vec<Vec<Vec<Var>>> = vec![Vec::new(); k + 1];
    let mut clauses: Vec<Clause> = Vec::new();
    let target = spec.vars - k;
    let mut placed = 0;
    while placed < target {
        let size = s.shape.gen_range(1..=c.min(target - placed).max(1));
        let t = random_template(&mut s.shape, size, k, spec.width, shape);
        // Signs are part of the template so every copy has the same type.
        let signs: Vec<Vec<bool>> = t
            .clauses
            .iter()
            .map(|cl| cl.iter().map(|_| s.signs.gen_bool(0.5)).collect())
            .collect();
        let copies = match shape {
            Shape::UniversallyComplete => (1usize << k) + s.shape.gen_range(0..=1),
            Shape::ExistsLe1Forall => s.shape.gen_range(1..=(1usize << c) + 1),
            Shape::Any | Shape::SingleDeletion => s.shape.gen_range(1..=2),
        };
        for _ in 0..copies {
            let locals: Vec<Var> = (0..size)
                .map(|_| {
                    next += 1;
                    next
                })
                .collect();
            for (i, &v) in locals.iter().enumerate() {
                quant_of.insert(v, t.quants[i]);
            }
            for (g, runs) in gap_runs.iter_mut().enumerate() {
                let run: Vec<Var> = (0..size)
                    .filter(|&i| t.gaps[i] == g)
                    .map(|i| locals[i])
                    .collect();
                if !run.is_empty() {
                    runs.push(run);
                }
            }
            for (cl, cl_signs) in t.clauses.iter().zip(&signs) {
                let lits = cl.iter().zip(cl_signs).map(|(slot, &positive)| {
                    let v = match *slot {
                        Slot::Local(i) => locals[i],
                        Slot::Deleted(j) => d[j],
                    };
                    Lit::new(v, positive)
                });
                clauses.push(lits.collect());
            }
            placed += size;
        }
    }
    if shape == Shape::SingleDeletion && !clauses.is_empty() {
        // Make sure the deletion variable actually joins components.
        for cl in clauses.iter_mut().filter(|cl| cl.len() < spec.width) {
            if s.shape.gen_bool(0.5) && !cl.iter().any(|l| l.var() == d[0]) {
                cl.push(Lit::new(d[0], s.signs.gen_bool(0.5)));
            }
        }
    }

    let mut prefix: Vec<(Quant, Var)> = Vec::new();
    for (g, runs) in gap_runs.iter_mut().enumerate() {
        prefix.extend(
            interleave(&mut s.prefix, runs)
                .into_iter()
                .map(|v| (quant_of[&v], v)),
        );
        if g < k {
            prefix.push((d_quant[g], d[g]));
        }
    }
    if shape == Shape::SingleDeletion && d_quant[0] == Quant::Exists && s.prefix.gen_bool(0.5) {
        // Often put the deletion variable innermost, the solver's base case.
        prefix.retain(|p| p.1 != d[0]);
        prefix.push((Quant::Exists, d[0]));
    }
    clauses.shuffle(&mut s.shape);
    Ok(Generated {
        formula: Qbf::new(next, prefix, Matrix::Cnf(clauses))?,
        witness: Witness::DeletionSet { set: d, c },
    })
}

/// Random merge of sequences that keeps each sequence's internal order.
fn interleave(r: &mut impl Rng, runs: &mut [Vec<Var>]) -> Vec<Var> {
    let mut cursors = vec![0usize; runs.len()];
    let total: usize = runs.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let open: Vec<usize> = (0..runs.len())
            .filter(|&i| cursors[i] < runs[i].len())
            .collect();
        let &i = open.choose(r).expect("some run is unfinished");
        out.push(runs[i][cursors[i]]);
        cursors[i] += 1;
    }
    out
}

fn alpha_td(
    spec: &GenSpec,
    h: usize,
    hung: usize,
    path_vars: usize,
    s: &mut Streams,
) -> Result<Generated> {
    consistent(h >= 1, "the main path needs a vertex")?;
    let n = (h + hung + path_vars) as Var;
    let h = h as Var;
    let mut order: Vec<Var> = (1..=n).collect();
    order.shuffle(&mut s.prefix);
    let prefix = block_prefix(&mut s.prefix, &order, spec.depth, Some(Quant::Exists));
    let alpha = Qbf {
        num_vars: n,
        prefix: prefix.clone(),
        matrix: Matrix::Cnf(vec![]),
    }
    .depth();

    let main_path: Vec<Var> = (1..=h).collect();
    let mut tree_parent: BTreeMap<Var, Var> = BTreeMap::new();
    let mut hung_depth: BTreeMap<Var, usize> = BTreeMap::new();
    for v in h + 1..=h + hung as Var {
        let mut candidates: Vec<(Var, usize)> = main_path.iter().map(|&m| (m, 0)).collect();
        candidates.extend(
            hung_depth
                .iter()
                .filter(|(_, &dep)| dep < alpha)
                .map(|(&u, &dep)| (u, dep)),
        );
        let &(p, dep) = candidates
            .choose(&mut s.shape)
            .expect("the main path is nonempty");
        tree_parent.insert(v, p);
        hung_depth.insert(v, dep + 1);
    }
    let leaves: Vec<Var> = hung_depth
        .keys()
        .copied()
        .filter(|v| !tree_parent.values().any(|p| p == v))
        .collect();
    let mut leaf_paths: Vec<(Var, Vec<Var>)> = Vec::new();
    let mut next = h + hung as Var + 1;
    for &leaf in &leaves {
        let left = n + 1 - next;
        if left == 0 {
            break;
        }
        let len = s.shape.gen_range(1..=left.min(h));
        leaf_paths.push((leaf, (next..next + len).collect()));
        next += len;
    }
    // Path variables without a leaf to hang on join the hung trees below the main path.
    for v in next..=n {
        tree_parent.insert(v, h);
    }
    let td = AlphaTd {
        main_path,
        tree_parent,
        leaf_paths,
    };
    let forest: TreedepthDecomposition = td.to_treedepth();
    let m = spec.clauses.unwrap_or(2 * n as usize);
    let mut cnf: Vec<Clause> = Vec::with_capacity(m);
    for _ in 0..m {
        let v = s.shape.gen_range(1..=n);
        let mut pool: Vec<Var> = forest
            .ancestors(Vertex::Var(v))
            .into_iter()
            .filter_map(|x| x.as_var())
            .collect();
        pool.shuffle(&mut s.shape);
        let mut vars = vec![v];
        let extra = s.shape.gen_range(0..spec.width.min(3));
        vars.extend(pool.into_iter().take(extra));
        cnf.push(s.lits(&vars));
    }
    let dnf: Vec<Clause> = (0..s.shape.gen_range(0..=2))
        .map(|_| {
            let v = s.shape.gen_range(1..=n);
            s.lits(&[v])
        })
        .collect();
    let matrix = Matrix::Cdnf {
        cnf,
        dnf,
        orientation: Orientation::CnfAndDnf,
    };
    Ok(Generated {
        formula: Qbf::new(n, prefix, matrix)?,
        witness: Witness::AlphaTd { decomposition: td },
    })
}

/// Check a witness against its formula.
pub fn check_witness(q: &Qbf, w: &Witness) -> std::result::Result<(), String> {
    match w {
        Witness::SparseFvs { set } => {
            let g = build_graph(q, GraphKind::Primal);
            let vs = vertex_set(&set.iter().copied().collect());
            if is_deletion_set(&g, Some(q), DeletionKind::SparseFvs, &vs) {
                Ok(())
            } else {
                Err("the set is not a sparse feedback vertex set".into())
            }
        }
        Witness::Fes { edges } => {
            let g = build_graph(q, GraphKind::Primal);
            let removed: BTreeSet<_> = edges
                .iter()
                .map(|&(a, b)| edge(Vertex::Var(a), Vertex::Var(b)))
                .collect();
            if !g.without_edges(&removed).is_acyclic() {
                return Err("removing the edges leaves a cycle".into());
            }
            if min_fes(&g).len() != edges.len() {
                return Err("the edge set is not minimum".into());
            }
            Ok(())
        }
        Witness::DeletionSet { set, c } => {
            let d: BTreeSet<Var> = set.iter().copied().collect();
            check_deletion_set(q, &d, Some(*c))
                .map(|_| ())
                .map_err(|e| e.to_string())
        }
        Witness::AlphaTd { decomposition } => {
            let g = build_graph(q, GraphKind::Primal);
            let report = validate_alpha_td(&g, decomposition, q.depth());
            if report.valid {
                Ok(())
            } else {
                Err(report.violations.join("; "))
            }
        }
    }
}

/// Whether every component type of `q − d` occurs at least `2^|d|` times with `d`
/// existential.
pub fn is_universally_complete(q: &Qbf, d: &BTreeSet<Var>) -> Result<bool> {
    if d.iter().any(|&v| q.quant_of(v) != Some(Quant::Exists)) {
        return Ok(false);
    }
    let need = 1usize.checked_shl(d.len() as u32).unwrap_or(usize::MAX);
    Ok(component_types(q, d)?.values().all(|cs| cs.len() >= need))
}
