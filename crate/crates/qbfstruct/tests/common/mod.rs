//! Shared test helpers: a brute-force evaluator written independently of the library's
//! evaluator, and seeded random formula generators.
#![allow(dead_code)]

pub mod game;

use std::collections::{BTreeMap, BTreeSet};

use qbfstruct::formula::{Clause, Lit, Matrix, Qbf, Quant, Var};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn lit_true(l: Lit, values: &[Option<bool>]) -> bool {
    values[l.var() as usize] == Some(l.is_positive())
}

/// Value of the matrix under a total assignment of the prefix variables.
/// Variables outside the prefix count as false.
pub fn matrix_value(m: &Matrix, values: &[Option<bool>]) -> bool {
    let cnf = |cs: &[Clause]| cs.iter().all(|c| c.iter().any(|&l| lit_true(l, values)));
    let dnf = |ts: &[Clause]| ts.iter().any(|t| t.iter().all(|&l| lit_true(l, values)));
    match m {
        Matrix::Cnf(c) => cnf(c),
        Matrix::Dnf(d) => dnf(d),
        Matrix::Cdnf {
            cnf: c,
            dnf: d,
            orientation,
        } => {
            use qbfstruct::formula::Orientation;
            match orientation {
                Orientation::CnfAndDnf => cnf(c) && dnf(d),
                Orientation::DnfOrCnf => dnf(d) || cnf(c),
            }
        }
    }
}

/// Three-valued matrix status under a partial assignment.
fn status(m: &Matrix, values: &[Option<bool>]) -> Option<bool> {
    let lit = |l: &Lit| values[l.var() as usize].map(|b| b == l.is_positive());
    let cnf = |cs: &[Clause]| {
        let mut all = true;
        for c in cs {
            let mut sat = false;
            let mut open = false;
            for l in c {
                match lit(l) {
                    Some(true) => sat = true,
                    None => open = true,
                    Some(false) => {}
                }
            }
            if !sat && !open {
                return Some(false);
            }
            all &= sat;
        }
        if all {
            Some(true)
        } else {
            None
        }
    };
    let dnf = |ts: &[Clause]| {
        let mut none = true;
        for t in ts {
            let mut falsified = false;
            let mut open = false;
            for l in t {
                match lit(l) {
                    Some(false) => falsified = true,
                    None => open = true,
                    Some(true) => {}
                }
            }
            if !falsified && !open {
                return Some(true);
            }
            none &= falsified;
        }
        if none {
            Some(false)
        } else {
            None
        }
    };
    match m {
        Matrix::Cnf(c) => cnf(c),
        Matrix::Dnf(d) => dnf(d),
        Matrix::Cdnf {
            cnf: c,
            dnf: d,
            orientation,
        } => {
            use qbfstruct::formula::Orientation;
            let (a, b) = (cnf(c), dnf(d));
            match orientation {
                Orientation::CnfAndDnf => match (a, b) {
                    (Some(false), _) | (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                },
                Orientation::DnfOrCnf => match (a, b) {
                    (Some(true), _) | (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                },
            }
        }
    }
}

fn game(q: &Qbf, depth: usize, values: &mut Vec<Option<bool>>) -> bool {
    let Some(&(quant, v)) = q.prefix.get(depth) else {
        return matrix_value(&q.matrix, values);
    };
    if let Some(decided) = status(&q.matrix, values) {
        return decided;
    }
    let mut outcome = quant == Quant::Forall;
    for b in [false, true] {
        values[v as usize] = Some(b);
        let r = game(q, depth + 1, values);
        values[v as usize] = None;
        if quant == Quant::Exists && r {
            outcome = true;
            break;
        }
        if quant == Quant::Forall && !r {
            outcome = false;
            break;
        }
    }
    outcome
}

/// Truth value by expansion of the prefix, cutting off once the matrix is decided.
pub fn oracle(q: &Qbf) -> bool {
    let max_var = q
        .prefix
        .iter()
        .map(|p| p.1)
        .chain(q.matrix.sets().flatten().map(|l| l.var()))
        .max()
        .unwrap_or(0);
    let mut values = vec![None; max_var as usize + 1];
    game(q, 0, &mut values)
}

/// Matrix satisfiability by enumerating all assignments of its variables.
pub fn matrix_sat_oracle(m: &Matrix) -> bool {
    let vars: Vec<Var> = m.vars().into_iter().collect();
    let max_var = vars.iter().copied().max().unwrap_or(0);
    (0..1u64 << vars.len()).any(|mask| {
        let mut values = vec![Some(false); max_var as usize + 1];
        for (i, &v) in vars.iter().enumerate() {
            values[v as usize] = Some(mask >> i & 1 == 1);
        }
        matrix_value(m, &values)
    })
}

pub fn random_quant(r: &mut impl Rng) -> Quant {
    if r.gen_bool(0.5) {
        Quant::Exists
    } else {
        Quant::Forall
    }
}

/// A clause over distinct variables from `1..=n`.
pub fn random_set(r: &mut impl Rng, n: u32, width: usize) -> Vec<Lit> {
    let mut vars: Vec<Var> = (1..=n).collect();
    vars.shuffle(r);
    vars.into_iter()
        .take(width)
        .map(|v| Lit::new(v, r.gen_bool(0.5)))
        .collect()
}

/// A random prefix over `1..=n` in a random order.
pub fn random_prefix(r: &mut impl Rng, n: u32) -> Vec<(Quant, Var)> {
    let mut vars: Vec<Var> = (1..=n).collect();
    vars.shuffle(r);
    vars.into_iter().map(|v| (random_quant(r), v)).collect()
}

/// Random CNF formula with `n` variables, `m` clauses of width in `widths`.
pub fn random_cnf(
    r: &mut impl Rng,
    n: u32,
    m: usize,
    widths: std::ops::RangeInclusive<usize>,
) -> Qbf {
    let clauses = (0..m)
        .map(|_| {
            let w = r.gen_range(widths.clone()).min(n as usize);
            random_set(r, n, w)
        })
        .collect();
    Qbf::new(n, random_prefix(r, n), Matrix::Cnf(clauses)).expect("valid random formula")
}

/// Random CNF whose primal graph is a random tree plus `extra` random edges,
/// each edge realized as a 2-clause; a few 3-clauses are placed on tree paths of length 2.
pub fn random_sparse_cnf(r: &mut impl Rng, n: u32, extra: usize) -> Qbf {
    let mut clauses: Vec<Clause> = Vec::new();
    let mut parent = vec![0u32; n as usize + 1];
    for v in 2..=n {
        let p = r.gen_range(1..v);
        parent[v as usize] = p;
        for _ in 0..r.gen_range(1..=2) {
            clauses.push(vec![
                Lit::new(p, r.gen_bool(0.5)),
                Lit::new(v, r.gen_bool(0.5)),
            ]);
        }
    }
    for _ in 0..extra {
        let set = random_set(r, n, 2.min(n as usize));
        clauses.push(set);
    }
    if n >= 3 && r.gen_bool(0.3) {
        let v = r.gen_range(3..=n);
        let p = parent[v as usize];
        if p > 1 {
            let g = parent[p as usize];
            clauses.push(vec![
                Lit::new(g, r.gen_bool(0.5)),
                Lit::new(p, r.gen_bool(0.5)),
                Lit::new(v, r.gen_bool(0.5)),
            ]);
        }
    }
    clauses.shuffle(r);
    Qbf::new(n, random_prefix(r, n), Matrix::Cnf(clauses)).expect("valid random formula")
}

/// Whether every assignment of `free` extending `values` satisfies the matrix.
pub fn all_extensions_satisfy(m: &Matrix, values: &mut Vec<Option<bool>>, free: &[Var]) -> bool {
    if let Some(decided) = status(m, values) {
        return decided;
    }
    let Some((&v, rest)) = free.split_first() else {
        return matrix_value(m, values);
    };
    let ok = [false, true].into_iter().all(|b| {
        values[v as usize] = Some(b);
        all_extensions_satisfy(m, values, rest)
    });
    values[v as usize] = None;
    ok
}

/// A prefix over `vars` in the given order with random quantifiers, the last one existential.
pub fn prefix_ending_existential(r: &mut impl Rng, vars: &[Var]) -> Vec<(Quant, Var)> {
    let mut prefix: Vec<(Quant, Var)> = vars.iter().map(|&v| (random_quant(r), v)).collect();
    if let Some(last) = prefix.last_mut() {
        last.0 = Quant::Exists;
    }
    prefix
}

/// A 3-CNF ∧ 1-DNF formula over `1..=n` with innermost ∃ and a planted sparse FVS
/// `S = 1..=k`: the other variables carry a random forest, each forest edge used by at
/// most one clause.
pub fn planted_sparse_fvs(
    r: &mut impl Rng,
    n: u32,
    k: u32,
    clauses: usize,
    dnf: usize,
) -> (Qbf, Vec<Var>) {
    let source: Vec<Var> = (1..=k.min(n)).collect();
    let rest: Vec<Var> = (k.min(n) + 1..=n).collect();
    let mut edges: Vec<(Var, Var)> = Vec::new();
    for (i, &v) in rest.iter().enumerate().skip(1) {
        if r.gen_bool(0.7) {
            edges.push((rest[r.gen_range(0..i)], v));
        }
    }
    edges.shuffle(r);
    let mut cnf: Vec<Clause> = Vec::new();
    for _ in 0..clauses {
        let mut vars: Vec<Var> = Vec::new();
        let from_rest = r.gen_range(0..=2usize);
        if from_rest == 2 {
            if let Some((a, b)) = edges.pop() {
                vars.extend([a, b]);
            }
        } else if from_rest == 1 && !rest.is_empty() {
            vars.push(*rest.choose(r).unwrap());
        }
        let mut pool = source.clone();
        pool.shuffle(r);
        while vars.len() < 3 && !pool.is_empty() && (vars.is_empty() || r.gen_bool(0.6)) {
            vars.push(pool.pop().unwrap());
        }
        if vars.is_empty() {
            continue;
        }
        cnf.push(
            vars.into_iter()
                .map(|v| Lit::new(v, r.gen_bool(0.5)))
                .collect(),
        );
    }
    let d: Vec<Clause> = (0..dnf).map(|_| random_set(r, n, 1)).collect();
    let mut order: Vec<Var> = (1..=n).collect();
    order.shuffle(r);
    let prefix = prefix_ending_existential(r, &order);
    let matrix = Matrix::Cdnf {
        cnf,
        dnf: d,
        orientation: qbfstruct::formula::Orientation::CnfAndDnf,
    };
    (
        Qbf::new(n, prefix, matrix).expect("valid planted formula"),
        source,
    )
}

/// A 3-CNF ∧ 1-DNF formula with innermost ∃ together with a planted α-treedepth
/// decomposition of its primal graph, α being the quantifier depth.
pub fn planted_alpha_td(
    r: &mut impl Rng,
    h: u32,
    hung: u32,
    path_vars: u32,
    clauses: usize,
) -> (Qbf, qbfstruct::graphs::AlphaTd) {
    use qbfstruct::graphs::AlphaTd;
    use std::collections::BTreeMap;
    let n = h + hung + path_vars;
    let mut order: Vec<Var> = (1..=n).collect();
    order.shuffle(r);
    let prefix = prefix_ending_existential(r, &order);
    let alpha = Qbf::new(n, prefix.clone(), Matrix::Cnf(vec![]))
        .unwrap()
        .depth();

    let main_path: Vec<Var> = (1..=h).collect();
    let mut tree_parent: BTreeMap<Var, Var> = BTreeMap::new();
    let mut hung_depth: BTreeMap<Var, usize> = BTreeMap::new();
    for v in h + 1..=h + hung {
        let mut candidates: Vec<(Var, usize)> = main_path.iter().map(|&s| (s, 0)).collect();
        candidates.extend(
            hung_depth
                .iter()
                .filter(|(_, &d)| d < alpha)
                .map(|(&u, &d)| (u, d)),
        );
        let &(p, d) = candidates.choose(r).unwrap();
        tree_parent.insert(v, p);
        hung_depth.insert(v, d + 1);
    }
    let leaves: Vec<Var> = hung_depth
        .keys()
        .copied()
        .filter(|v| !tree_parent.values().any(|p| p == v))
        .collect();
    let mut leaf_paths: Vec<(Var, Vec<Var>)> = Vec::new();
    let mut next = h + hung + 1;
    let mut used = 0;
    for &leaf in &leaves {
        if used == path_vars {
            break;
        }
        let len = r.gen_range(1..=(path_vars - used).min(h));
        leaf_paths.push((leaf, (next..next + len).collect()));
        next += len;
        used += len;
    }
    let td = AlphaTd {
        main_path,
        tree_parent,
        leaf_paths,
    };
    // Unused path variables (no leaf to hang on) go under the main path's last vertex.
    let mut forest = td.to_treedepth();
    let mut td = td;
    for v in next..=n {
        td.tree_parent.insert(v, h);
        forest.set_parent(
            qbfstruct::graphs::Vertex::Var(v),
            Some(qbfstruct::graphs::Vertex::Var(h)),
        );
    }
    let chain = |v: Var| -> Vec<Var> {
        let mut out = vec![v];
        out.extend(
            forest
                .ancestors(qbfstruct::graphs::Vertex::Var(v))
                .into_iter()
                .filter_map(|x| x.as_var()),
        );
        out
    };
    let mut cnf: Vec<Clause> = Vec::new();
    for _ in 0..clauses {
        let v = r.gen_range(1..=n);
        let mut pool = chain(v);
        pool.remove(0);
        pool.shuffle(r);
        let mut vars = vec![v];
        vars.extend(pool.into_iter().take(r.gen_range(0..=2)));
        cnf.push(
            vars.into_iter()
                .map(|v| Lit::new(v, r.gen_bool(0.5)))
                .collect(),
        );
    }
    let d: Vec<Clause> = (0..r.gen_range(0..=2))
        .map(|_| random_set(r, n, 1))
        .collect();
    let matrix = Matrix::Cdnf {
        cnf,
        dnf: d,
        orientation: qbfstruct::formula::Orientation::CnfAndDnf,
    };
    (
        Qbf::new(n, prefix, matrix).expect("valid planted formula"),
        td,
    )
}

/// Whether `player` has a strategy on `prefix` such that every total assignment
/// reachable against it satisfies `goal`, found by enumerating explicit strategy
/// tables. Each of the player's variables reads the opponent variables before it.
pub fn strategy_exists(
    num_vars: u32,
    prefix: &[(Quant, Var)],
    player: Quant,
    goal: &dyn Fn(&[Option<bool>]) -> bool,
) -> bool {
    let max_var = num_vars as usize;
    let opponents: Vec<Var> = prefix
        .iter()
        .filter(|p| p.0 != player)
        .map(|p| p.1)
        .collect();
    // For each own variable, how many opponent variables precede it.
    let mut own: Vec<(Var, usize)> = Vec::new();
    let mut seen = 0;
    for &(q, v) in prefix {
        if q == player {
            own.push((v, seen));
        } else {
            seen += 1;
        }
    }
    let table_sizes: Vec<u32> = own.iter().map(|&(_, inputs)| 1u32 << inputs).collect();
    let total_bits: u32 = table_sizes.iter().sum();
    assert!(total_bits <= 24, "strategy space too large for enumeration");
    let plays: Vec<Vec<Option<bool>>> = (0..1u64 << opponents.len())
        .map(|mask| {
            let mut values = vec![None; max_var + 1];
            for (i, &v) in opponents.iter().enumerate() {
                values[v as usize] = Some(mask >> i & 1 == 1);
            }
            values
        })
        .collect();
    (0..1u64 << total_bits).any(|strategy| {
        plays.iter().all(|play| {
            let mut values = play.clone();
            let mut offset = 0;
            for (k, &(v, inputs)) in own.iter().enumerate() {
                let index: usize = opponents[..inputs]
                    .iter()
                    .enumerate()
                    .map(|(i, &o)| (values[o as usize] == Some(true)) as usize * (1 << i))
                    .sum();
                values[v as usize] = Some(strategy >> (offset + index as u32) & 1 == 1);
                offset += table_sizes[k];
            }
            goal(&values)
        })
    })
}

/// A Boolean value of a CNF under a total assignment stored by variable id.
pub fn cnf_value(clauses: &[Clause], values: &[Option<bool>]) -> bool {
    clauses
        .iter()
        .all(|c| c.iter().any(|&l| lit_true(l, values)))
}

/// A vertex cover of the incidence graph: every variable of degree at least three,
/// plus each clause that still has an uncovered variable. Returns the variables
/// and the number of clauses.
pub fn incidence_cover(q: &Qbf) -> (BTreeSet<Var>, usize) {
    let mut cover_vars: BTreeSet<Var> = BTreeSet::new();
    let clauses = q.clauses();
    let mut open: Vec<usize> = (0..clauses.len()).collect();
    let mut counts: BTreeMap<Var, usize> = BTreeMap::new();
    for c in clauses {
        for l in c {
            *counts.entry(l.var()).or_default() += 1;
        }
    }
    let mut by_degree: Vec<(Var, usize)> = counts.into_iter().collect();
    by_degree.sort_by_key(|&(v, d)| (std::cmp::Reverse(d), v));
    for (v, d) in by_degree {
        if d >= 3 {
            cover_vars.insert(v);
        }
    }
    open.retain(|&i| !clauses[i].iter().all(|l| cover_vars.contains(&l.var())));
    (cover_vars, open.len())
}
