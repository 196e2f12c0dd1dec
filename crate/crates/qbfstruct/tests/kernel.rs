mod common;

use common::{oracle, random_cnf, random_sparse_cnf, rng};
use proptest::prelude::*;
use qbfstruct::formula::{evaluate, Lit, Matrix, Qbf, Quant};
use qbfstruct::graphs::{build_graph, clean_structure, min_fes, GraphKind};
use qbfstruct::kernel::{
    check_reduced, incidence_size_bound, kernelize, primal_clause_bound, primal_var_bound,
    rule_clean_multiplicity, rule_contract_path, rule_leaf, rule_substitute_pair,
    rule_unit_and_pure, Outcome, Rule,
};

fn cnf(blocks: &[(Quant, &[u32])], clauses: &[&[i32]]) -> Qbf {
    let clauses = clauses
        .iter()
        .map(|c| c.iter().map(|&d| Lit::from_dimacs(d).unwrap()).collect())
        .collect();
    Qbf::from_blocks(blocks, Matrix::Cnf(clauses)).unwrap()
}

use Quant::{Exists as E, Forall as A};

fn reduced(o: Outcome) -> Qbf {
    match o {
        Outcome::Reduced { formula, .. } => formula,
        other => panic!("expected a reduction, got {other:?}"),
    }
}

#[test]
fn universal_unit_is_false() {
    let q = cnf(&[(A, &[1]), (E, &[2])], &[&[1], &[1, 2]]);
    assert!(matches!(
        rule_unit_and_pure(&q).unwrap(),
        Outcome::Decided { value: false, .. }
    ));
}

#[test]
fn existential_unit_is_assigned() {
    let q = cnf(&[(E, &[1])], &[&[1]]);
    let r = reduced(rule_unit_and_pure(&q).unwrap());
    assert!(r.clauses().is_empty());
    assert!(evaluate(&r).unwrap());
}

#[test]
fn existential_pure_literal_is_satisfied() {
    let q = cnf(&[(E, &[1, 2])], &[&[1, 2]]);
    let Outcome::Reduced { formula, step } = rule_unit_and_pure(&q).unwrap() else {
        panic!()
    };
    assert_eq!(
        (step.rule, step.var, step.assigned),
        (Rule::Pure, Some(1), Some(1))
    );
    assert!(formula.clauses().is_empty());
}

#[test]
fn universal_pure_literal_is_falsified() {
    let q = cnf(&[(A, &[1]), (E, &[2])], &[&[1, 2], &[-2, 1]]);
    let Outcome::Reduced { formula, step } = rule_unit_and_pure(&q).unwrap() else {
        panic!()
    };
    assert_eq!(step.assigned, Some(0));
    assert_eq!(evaluate(&formula).unwrap(), oracle(&q));
}

#[test]
fn four_clauses_on_a_clean_edge_are_false() {
    let q = cnf(&[(E, &[1, 2])], &[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]);
    assert!(matches!(
        rule_clean_multiplicity(&q, 1, 2).unwrap(),
        Outcome::Decided { value: false, .. }
    ));
}

#[test]
fn three_clauses_assign_the_unique_model() {
    let q = cnf(&[(E, &[1, 2])], &[&[1, 2], &[-1, 2], &[1, -2]]);
    let r = reduced(rule_clean_multiplicity(&q, 1, 2).unwrap());
    assert!(r.prefix.is_empty() && r.clauses().is_empty());
    let q = cnf(&[(E, &[1]), (A, &[2])], &[&[1, 2], &[-1, 2], &[1, -2]]);
    assert!(matches!(
        rule_clean_multiplicity(&q, 1, 2).unwrap(),
        Outcome::Decided { value: false, .. }
    ));
}

#[test]
fn multiplicity_rejects_non_clean_edges() {
    let q = cnf(
        &[(E, &[1, 2, 3])],
        &[&[1, 2, 3], &[1, 2], &[-1, 2], &[1, -2]],
    );
    assert!(rule_clean_multiplicity(&q, 1, 2)
        .unwrap_err()
        .is_precondition());
}

#[test]
fn complementary_pair_substitutes_the_inner_variable() {
    let q = cnf(&[(E, &[1, 2, 3])], &[&[1, 2], &[-1, -2], &[2, 3]]);
    let Outcome::Reduced { formula, step } = rule_substitute_pair(&q, 1, 2).unwrap() else {
        panic!()
    };
    assert_eq!(step.var, Some(2));
    assert_eq!(step.replaced_by, Some(Lit::neg(1)));
    assert_eq!(formula.prefix.len(), 2);
    assert_eq!(evaluate(&formula).unwrap(), oracle(&q));
}

#[test]
fn pair_with_a_common_value_fixes_it() {
    let q = cnf(&[(E, &[1, 2])], &[&[1, 2], &[-1, 2]]);
    let Outcome::Reduced { step, .. } = rule_substitute_pair(&q, 1, 2).unwrap() else {
        panic!()
    };
    assert_eq!((step.var, step.assigned), (Some(2), Some(1)));
    let q = cnf(&[(E, &[1]), (A, &[2])], &[&[1, 2], &[-1, 2]]);
    assert!(matches!(
        rule_substitute_pair(&q, 1, 2).unwrap(),
        Outcome::Decided { value: false, .. }
    ));
    let q = cnf(&[(E, &[1, 2])], &[&[1, 2], &[1, -2]]);
    let Outcome::Reduced { step, .. } = rule_substitute_pair(&q, 1, 2).unwrap() else {
        panic!()
    };
    assert_eq!((step.var, step.assigned), (Some(1), Some(1)));
}

#[test]
fn leaf_rule() {
    let q = cnf(&[(E, &[1, 2])], &[&[1, 2]]);
    let Outcome::Reduced { formula, step } = rule_leaf(&q, 2).unwrap() else {
        panic!()
    };
    assert_eq!(step.assigned, Some(1));
    assert!(formula.clauses().is_empty());
    let q = cnf(&[(E, &[1]), (A, &[2])], &[&[1, 2]]);
    let r = reduced(rule_leaf(&q, 2).unwrap());
    assert_eq!(r.clauses(), &[vec![Lit::pos(1)]]);
}

#[test]
fn leaf_on_a_deleted_edge_is_refused() {
    // Triangle 1-2-3 plus pendant 4 on 3; the BFS forest deletes edge 2-3.
    let q = cnf(
        &[(E, &[1, 2, 3, 4])],
        &[&[1, 2], &[-1, 3], &[2, -3], &[3, 4], &[-3, -4]],
    );
    let g = build_graph(&q, GraphKind::Primal);
    let fes = min_fes(&g);
    assert_eq!(fes.len(), 1);
    let (a, b) = fes[0];
    for v in [a, b] {
        let x = v.as_var().unwrap();
        assert_eq!(rule_leaf(&q, x).unwrap(), Outcome::NotApplicable);
    }
}

#[test]
fn path_contraction_resolves_or_splits() {
    // Chain x1 - x2 - x3 - x4 with x2, x3 inner.
    let q = cnf(
        &[(E, &[1, 4, 3]), (E, &[2])],
        &[&[1, 2], &[-2, 3], &[-3, 4]],
    );
    let s = clean_structure(&q, GraphKind::Primal, &[]).unwrap();
    let path = s.paths.iter().find(|p| p.inner().len() >= 2).unwrap();
    let r = reduced(rule_contract_path(&q, GraphKind::Primal, path).unwrap());
    assert!(r.clauses().contains(&vec![Lit::pos(1), Lit::pos(3)]));
    assert_eq!(evaluate(&r).unwrap(), oracle(&q));

    let q = cnf(
        &[(E, &[1, 4, 3]), (A, &[2])],
        &[&[1, 2], &[-2, 3], &[-3, 4]],
    );
    let r = reduced(rule_contract_path(&q, GraphKind::Primal, path).unwrap());
    assert!(r.clauses().contains(&vec![Lit::pos(1)]));
    assert!(r.clauses().contains(&vec![Lit::pos(3)]));
}

#[test]
fn short_paths_are_not_contracted() {
    let q = cnf(&[(E, &[1, 2, 3])], &[&[1, 2], &[-2, 3]]);
    let s = clean_structure(&q, GraphKind::Primal, &[]).unwrap();
    for p in &s.paths {
        assert_eq!(
            rule_contract_path(&q, GraphKind::Primal, p).unwrap(),
            Outcome::NotApplicable
        );
    }
}

#[test]
fn tree_shaped_formulas_reduce_to_constants() {
    for seed in 0..200 {
        let mut r = rng(seed);
        let q = random_sparse_cnf(&mut r, 1 + (seed % 10) as u32, 0);
        if !min_fes(&build_graph(&q, GraphKind::Primal)).is_empty() {
            continue;
        }
        let res = kernelize(&q, GraphKind::Primal).unwrap();
        assert_eq!(res.verdict, Some(oracle(&q)), "seed {seed}");
    }
}

#[test]
fn crafted_two_cycle_kernel_is_small() {
    // Two triangles sharing a chain; k = 2.
    let q = cnf(
        &[(A, &[1]), (E, &[2, 3, 4, 5, 6])],
        &[
            &[1, 2],
            &[-2, 3],
            &[-1, -3],
            &[3, 4],
            &[-4, 5],
            &[5, -6],
            &[6, -3],
            &[-5, 1, 6],
        ],
    );
    let res = kernelize(&q, GraphKind::Primal).unwrap();
    assert!(res.stats.k >= 2);
    assert!(res.kernel.prefix.len() <= primal_var_bound(res.stats.k));
    assert_eq!(evaluate(&res.kernel).unwrap(), oracle(&q));
}

fn check_kernel(q: &Qbf, kind: GraphKind) -> Result<(), TestCaseError> {
    let res = kernelize(q, kind).unwrap();
    let expected = oracle(q);
    prop_assert_eq!(evaluate(&res.kernel).unwrap(), expected);
    if let Some(v) = res.verdict {
        prop_assert_eq!(v, expected);
        prop_assert_eq!(res.trace.last().and_then(|t| t.verdict).unwrap_or(v), v);
    }
    prop_assert!(
        check_reduced(&res.kernel, kind).is_ok(),
        "{:?}",
        check_reduced(&res.kernel, kind)
    );
    let k = res.stats.k;
    match kind {
        GraphKind::Primal => {
            prop_assert!(res.stats.kernel_vars <= primal_var_bound(k));
            prop_assert!(res.stats.kernel_clauses <= primal_clause_bound(k));
        }
        GraphKind::Incidence => {
            prop_assert!(
                res.stats.kernel_vars + res.stats.kernel_clauses <= incidence_size_bound(k)
            );
        }
    }
    // The kernel's graph never needs more deleted edges than the input's.
    prop_assert!(min_fes(&build_graph(&res.kernel, kind)).len() <= k);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn primal_kernel_is_equivalent_and_reduced(seed in any::<u64>(), n in 1u32..=12, m in 0usize..=14) {
        let q = random_cnf(&mut rng(seed), n, m, 1..=3);
        check_kernel(&q, GraphKind::Primal)?;
    }

    #[test]
    fn incidence_kernel_is_equivalent_and_reduced(seed in any::<u64>(), n in 1u32..=12, m in 0usize..=14) {
        let q = random_cnf(&mut rng(seed), n, m, 1..=3);
        check_kernel(&q, GraphKind::Incidence)?;
    }

    #[test]
    fn planted_fes_kernels_obey_bounds(seed in any::<u64>(), n in 2u32..=12, extra in 0usize..=4) {
        let q = random_sparse_cnf(&mut rng(seed), n, extra);
        check_kernel(&q, GraphKind::Primal)?;
        check_kernel(&q, GraphKind::Incidence)?;
    }

    #[test]
    fn every_rule_shrinks_the_formula(seed in any::<u64>(), n in 1u32..=10, m in 0usize..=12) {
        let q = random_cnf(&mut rng(seed), n, m, 1..=3);
        let res = kernelize(&q, GraphKind::Primal).unwrap();
        let measure = |q: &Qbf| q.prefix.len() + q.clauses().len() + q.matrix.literal_count();
        prop_assert!(res.trace.len() <= measure(&q));
    }
}
