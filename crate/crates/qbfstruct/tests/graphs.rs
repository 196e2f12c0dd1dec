mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{random_cnf, rng};
use itertools::Itertools;
use qbfstruct::formula::{Lit, Matrix, Qbf, Quant, Var};
use qbfstruct::graphs::{
    build_graph, clean_structure, edge, enumerate_c_deletion_sets, is_deletion_set, is_sparse,
    min_deletion_set, min_fes, validate_decomposition, validate_td, Decomposition, DeletionKind,
    Graph, GraphKind, TreeDecomposition, Vertex,
};
use rand::Rng;

fn v(x: Var) -> Vertex {
    Vertex::Var(x)
}

fn lits(codes: &[i32]) -> Vec<Lit> {
    codes
        .iter()
        .map(|&c| Lit::from_dimacs(c).unwrap())
        .collect()
}

fn graph(n: u32, edges: &[(Var, Var)]) -> Graph {
    let mut g = Graph::new();
    for x in 1..=n {
        g.add_vertex(v(x));
    }
    for &(a, b) in edges {
        g.add_edge(v(a), v(b));
    }
    g
}

fn random_graph(r: &mut impl Rng, n: u32, p: f64) -> Graph {
    let edges: Vec<(Var, Var)> = (1..=n)
        .tuple_combinations()
        .filter(|_| r.gen_bool(p))
        .collect();
    graph(n, &edges)
}

fn running() -> Qbf {
    let prefix = vec![
        (Quant::Forall, 1),
        (Quant::Forall, 2),
        (Quant::Exists, 3),
        (Quant::Exists, 4),
    ];
    let clauses = vec![
        lits(&[-1, -2, 3]),
        lits(&[1, 2, 3]),
        lits(&[-1, -3, 4]),
        lits(&[1, -3, -4]),
    ];
    Qbf::new(4, prefix, Matrix::Cnf(clauses)).unwrap()
}

/// Connected components by union-find, written independently of the library.
fn component_sizes(vertices: &[Vertex], edges: &[(Vertex, Vertex)]) -> Vec<usize> {
    let index: BTreeMap<Vertex, usize> =
        vertices.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let root = find(p, p[x]);
            p[x] = root;
        }
        p[x]
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, index[a]), find(&mut parent, index[b]));
        parent[ra] = rb;
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..vertices.len() {
        *sizes.entry(find(&mut parent, i)).or_default() += 1;
    }
    sizes.into_values().collect()
}

/// Vertices and edges of `g` minus `removed`.
fn remainder(g: &Graph, removed: &BTreeSet<Vertex>) -> (Vec<Vertex>, Vec<(Vertex, Vertex)>) {
    let vs: Vec<Vertex> = g.vertices().filter(|x| !removed.contains(x)).collect();
    let es: Vec<(Vertex, Vertex)> = g
        .edges()
        .iter()
        .copied()
        .filter(|(a, b)| !removed.contains(a) && !removed.contains(b))
        .collect();
    (vs, es)
}

fn acyclic_without(g: &Graph, removed: &BTreeSet<Vertex>) -> bool {
    let (vs, es) = remainder(g, removed);
    es.len() + component_sizes(&vs, &es).len() == vs.len()
}

fn independent_check(g: &Graph, kind: DeletionKind, s: &BTreeSet<Vertex>) -> bool {
    let (vs, es) = remainder(g, s);
    match kind {
        DeletionKind::Fvs => acyclic_without(g, s),
        DeletionKind::VertexCover => es.is_empty(),
        DeletionKind::CDeletion(c) => component_sizes(&vs, &es).iter().all(|&k| k <= c),
        DeletionKind::SparseFvs => unreachable!("needs a formula"),
    }
}

#[test]
fn single_clause_incidence_graph_is_a_star() {
    let q = Qbf::new(
        3,
        vec![(Quant::Exists, 1), (Quant::Exists, 2), (Quant::Exists, 3)],
        Matrix::Cnf(vec![lits(&[1, 2, 3])]),
    )
    .unwrap();
    let g = build_graph(&q, GraphKind::Incidence);
    assert_eq!(g.edge_count(), 3);
    assert_eq!(g.degree(Vertex::Clause(0)), 3);
}

#[test]
fn feedback_edge_set_examples() {
    assert_eq!(min_fes(&graph(3, &[(1, 2), (2, 3), (1, 3)])).len(), 1);
    assert_eq!(
        min_fes(&build_graph(&running(), GraphKind::Primal)).len(),
        2
    );
    assert!(min_fes(&graph(4, &[(1, 2), (2, 3), (1, 4)])).is_empty());
}

#[test]
fn feedback_edge_set_size_formula() {
    for seed in 0..500u64 {
        let mut r = rng(seed);
        let n = r.gen_range(1..=12);
        let p = r.gen_range(0.05..0.6);
        let g = random_graph(&mut r, n, p);
        let fes = min_fes(&g);
        let vs: Vec<Vertex> = g.vertices().collect();
        let components = component_sizes(&vs, g.edges()).len();
        assert_eq!(
            fes.len(),
            g.edge_count() + components - g.vertex_count(),
            "seed {seed}"
        );
        let rest: Vec<_> = g
            .edges()
            .iter()
            .copied()
            .filter(|e| !fes.contains(e))
            .collect();
        assert_eq!(
            rest.len() + components,
            vs.len(),
            "seed {seed}: remainder has a cycle"
        );
        assert_eq!(min_fes(&g), fes, "deterministic");
    }
}

#[test]
fn deletion_set_examples_on_the_running_example() {
    let q = running();
    let g = build_graph(&q, GraphKind::Primal);
    let fvs = min_deletion_set(&g, Some(&q), DeletionKind::Fvs, 3).unwrap();
    assert_eq!(fvs, [v(1)].into());
    let sparse = min_deletion_set(&g, Some(&q), DeletionKind::SparseFvs, 3).unwrap();
    assert_eq!(sparse.len(), 2);
    assert!(is_deletion_set(
        &g,
        Some(&q),
        DeletionKind::SparseFvs,
        &[v(1), v(3)].into()
    ));
    assert_eq!(
        min_deletion_set(&g, Some(&q), DeletionKind::VertexCover, 4)
            .unwrap()
            .len(),
        2
    );
    assert!(min_deletion_set(&g, Some(&q), DeletionKind::VertexCover, 1).is_none());
}

#[test]
fn c_deletion_examples() {
    let path = graph(3, &[(1, 2), (2, 3)]);
    assert_eq!(
        enumerate_c_deletion_sets(&path, 1, 1),
        vec![BTreeSet::from([v(2)])]
    );
    let star = graph(5, &[(1, 2), (1, 3), (1, 4), (1, 5)]);
    assert_eq!(
        enumerate_c_deletion_sets(&star, 1, 1),
        vec![BTreeSet::from([v(1)])]
    );
}

#[test]
fn deletion_sets_match_exhaustive_search() {
    for seed in 0..100u64 {
        let mut r = rng(1000 + seed);
        let n = r.gen_range(1..=10);
        let p = r.gen_range(0.1..0.5);
        let g = random_graph(&mut r, n, p);
        let vs: Vec<Vertex> = g.vertices().collect();
        let subsets = || {
            (0..=vs.len())
                .flat_map(|k| vs.iter().copied().combinations(k))
                .map(|c| c.into_iter().collect::<BTreeSet<_>>())
        };
        for kind in [
            DeletionKind::Fvs,
            DeletionKind::VertexCover,
            DeletionKind::CDeletion(2),
        ] {
            let best = subsets()
                .filter(|s| independent_check(&g, kind, s))
                .map(|s| s.len())
                .min()
                .unwrap();
            let found = min_deletion_set(&g, None, kind, 10).unwrap();
            assert_eq!(found.len(), best, "seed {seed} {kind:?}");
            assert!(independent_check(&g, kind, &found));
        }
        let c = r.gen_range(1..=3);
        let k = r.gen_range(0..=4);
        let kind = DeletionKind::CDeletion(c);
        let valid: Vec<BTreeSet<Vertex>> = subsets()
            .filter(|s| s.len() <= k && independent_check(&g, kind, s))
            .collect();
        let minimal: BTreeSet<BTreeSet<Vertex>> = valid
            .iter()
            .filter(|s| !valid.iter().any(|t| t.len() < s.len() && t.is_subset(s)))
            .cloned()
            .collect();
        let got: BTreeSet<BTreeSet<Vertex>> =
            enumerate_c_deletion_sets(&g, c, k).into_iter().collect();
        assert_eq!(got, minimal, "seed {seed} c={c} k={k}");
    }
}

#[test]
fn sparse_fvs_leaves_pairs_in_at_most_one_set() {
    for seed in 0..150u64 {
        let mut r = rng(2000 + seed);
        let n = r.gen_range(2..=8);
        let m = r.gen_range(1..=2 * n as usize);
        let q = random_cnf(&mut r, n, m, 2..=3);
        let g = build_graph(&q, GraphKind::Primal);
        let Some(s) = min_deletion_set(&g, Some(&q), DeletionKind::SparseFvs, n as usize) else {
            continue;
        };
        assert!(acyclic_without(&g, &s));
        let outside = |x: Var| !s.contains(&v(x));
        for (a, b) in (1..=n).filter(|&x| outside(x)).tuple_combinations() {
            let shared = q
                .matrix
                .sets()
                .filter(|set| set.iter().any(|l| l.var() == a) && set.iter().any(|l| l.var() == b))
                .count();
            assert!(shared <= 1, "seed {seed}: x{a}, x{b} share {shared}");
        }
        assert!(is_sparse(&q, &s));
    }
}

#[test]
fn incidence_and_primal_feedback_numbers_are_incomparable() {
    // One long clause: a clique in the primal graph, a star in the incidence graph.
    let n = 7;
    let prefix: Vec<(Quant, Var)> = (1..=n).map(|x| (Quant::Exists, x)).collect();
    let long = Qbf::new(
        n,
        prefix.clone(),
        Matrix::Cnf(vec![(1..=n as i32)
            .map(|x| Lit::from_dimacs(x).unwrap())
            .collect()]),
    )
    .unwrap();
    let fvs = |q: &Qbf, kind| {
        min_deletion_set(&build_graph(q, kind), Some(q), DeletionKind::Fvs, 8)
            .unwrap()
            .len()
    };
    assert_eq!(fvs(&long, GraphKind::Primal), n as usize - 2);
    assert_eq!(fvs(&long, GraphKind::Incidence), 0);

    // Pairs inside two 2-clauses: a single primal edge, a 4-cycle in the incidence graph.
    let pairs = 3;
    let clauses: Vec<Vec<Lit>> = (0..pairs)
        .flat_map(|i| {
            [
                lits(&[2 * i + 1, 2 * i + 2]),
                lits(&[-(2 * i + 1), 2 * i + 2]),
            ]
        })
        .collect();
    let q = Qbf::new(
        2 * pairs as u32,
        (1..=2 * pairs as u32).map(|x| (Quant::Exists, x)).collect(),
        Matrix::Cnf(clauses),
    )
    .unwrap();
    assert_eq!(fvs(&q, GraphKind::Primal), 0);
    assert_eq!(fvs(&q, GraphKind::Incidence), pairs as usize);
}

#[test]
fn clean_edges_and_paths() {
    let chain = Qbf::new(
        4,
        (1..=4).map(|x| (Quant::Exists, x)).collect(),
        Matrix::Cnf(vec![lits(&[1, 2]), lits(&[2, 3]), lits(&[3, 4])]),
    )
    .unwrap();
    let s = clean_structure(&chain, GraphKind::Primal, &[]).unwrap();
    assert_eq!(s.clean_edges.len(), 3);
    assert_eq!(s.paths.len(), 1);
    assert_eq!(s.paths[0].inner(), &[v(2), v(3)]);

    let q = running();
    let s = clean_structure(&q, GraphKind::Primal, &[edge(v(1), v(2)), edge(v(1), v(3))]).unwrap();
    assert!(!s.clean_edges.contains(&edge(v(2), v(3))));
    assert!(clean_structure(&q, GraphKind::Primal, &[])
        .unwrap_err()
        .is_precondition());

    let triangle_clause = Qbf::new(
        3,
        (1..=3).map(|x| (Quant::Exists, x)).collect(),
        Matrix::Cnf(vec![lits(&[1, 2, 3])]),
    )
    .unwrap();
    let s = clean_structure(&triangle_clause, GraphKind::Primal, &[edge(v(1), v(3))]).unwrap();
    assert!(s.clean_edges.is_empty());
}

#[test]
fn tree_decomposition_checks() {
    let g = build_graph(&running(), GraphKind::Primal);
    let td = TreeDecomposition::path(vec![[v(1), v(2), v(3)].into(), [v(1), v(3), v(4)].into()]);
    let report = validate_td(&g, &td);
    assert!(report.valid);
    assert_eq!(report.measure, 2);

    let missing = TreeDecomposition::path(vec![
        [v(1), v(2), v(3)].into(),
        [v(3), v(4)].into(),
        [v(1)].into(),
    ]);
    let report = validate_decomposition(&g, &Decomposition::Tree(missing));
    assert!(!report.valid);
    assert!(
        report
            .violations
            .iter()
            .any(|m| m.contains("x1") && m.contains("x4")),
        "{:?}",
        report.violations
    );
}
