use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn qbfstruct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbfstruct"))
        .args(args)
        .env_remove("QBFSTRUCT_VAR_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn running_example_is_true_by_brute_force() {
    let o = qbfstruct(&[
        "solve",
        "--strategy",
        "brute",
        path_str(&data("running.qcdnf")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "TRUE");
}

#[test]
fn every_strategy_answers_on_the_running_example() {
    let file = data("running.qcdnf");
    let runs: [&[&str]; 7] = [
        &["auto"],
        &["brute"],
        &["vc-cache"],
        &["dedup"],
        &["single-del", "--deletion-set", "3"],
        &["e1a", "--deletion-set", "3,4"],
        &["uni-complete", "--deletion-set", "1,2,3,4"],
    ];
    for run in runs {
        let strategy = run[0];
        let mut args = vec!["solve", path_str(&file), "--strategy"];
        args.extend(run);
        let o = qbfstruct(&args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{strategy}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(stdout(&o).trim(), "TRUE", "{strategy}");
    }
}

#[test]
fn json_solve_reports_strategy_and_indices() {
    let o = qbfstruct(&[
        "--json",
        "solve",
        "--strategy",
        "single-del",
        "--deletion-set",
        "3",
        path_str(&data("running.qcdnf")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], true);
    assert_eq!(v["strategy"], "single-del");
}

#[test]
fn missing_deletion_set_is_a_precondition_failure() {
    let o = qbfstruct(&[
        "solve",
        "--strategy",
        "e1a",
        path_str(&data("running.qcdnf")),
    ]);
    assert_eq!(o.status.code(), Some(10));
}

#[test]
fn unreadable_and_malformed_inputs_exit_with_one() {
    assert_eq!(
        qbfstruct(&["stats", "/nonexistent/file.qdimacs"])
            .status
            .code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qdimacs");
    std::fs::write(&bad, "p cnf 2 1\ne 1 2 0\n1 x 0\n").unwrap();
    let o = qbfstruct(&["stats", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(
        qbfstruct(&[
            "solve",
            "--strategy",
            "nope",
            path_str(&data("running.qcdnf"))
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn kernelize_writes_kernel_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kernel.qdimacs");
    let o = qbfstruct(&[
        "kernelize",
        "--graph",
        "primal",
        path_str(&data("tiny.qdimacs")),
        "-o",
        path_str(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let kernel = std::fs::read_to_string(&out).unwrap();
    assert!(kernel.starts_with("p cnf"));
    let trace: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("kernel.qdimacs.trace.json")).unwrap(),
    )
    .unwrap();
    assert!(trace["trace"].is_array());
    assert!(trace["stats"]["k"].is_number());

    let brute = |p: &Path| stdout(&qbfstruct(&["solve", "--strategy", "brute", path_str(p)]));
    assert_eq!(brute(&out), brute(&data("tiny.qdimacs")));
}

#[test]
fn saw_fvs_writes_formula_and_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reduced.qcdnf");
    let o = qbfstruct(&[
        "saw",
        "fvs",
        path_str(&data("running_terms.qcdnf")),
        "--set",
        "1,3",
        "-o",
        path_str(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let plan: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("reduced.qcdnf.plan.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(plan["s_prime"].as_array().unwrap().len(), 7);
    assert!(plan["plan"]["names"].is_object());
    let o = qbfstruct(&["solve", "--strategy", "brute", path_str(&out)]);
    assert_eq!(stdout(&o).trim(), "TRUE");
}

#[test]
fn saw_fvs_rejects_a_set_that_is_not_an_fvs() {
    let o = qbfstruct(&["saw", "fvs", path_str(&data("running.qcdnf")), "--set", "2"]);
    assert_eq!(o.status.code(), Some(10));
}

#[test]
fn td_cnf_and_fold_produce_cnf() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("cnf.qdimacs");
    let o = qbfstruct(&[
        "saw",
        "td-cnf",
        path_str(&data("running_terms.qcdnf")),
        "-o",
        path_str(&cnf),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(std::fs::read_to_string(&cnf).unwrap().starts_with("p cnf"));
    assert!(dir.path().join("cnf.qdimacs.plan.json").exists());
    assert_eq!(
        stdout(&qbfstruct(&[
            "solve",
            "--strategy",
            "brute",
            path_str(&cnf)
        ]))
        .trim(),
        "TRUE"
    );

    let o = qbfstruct(&[
        "--json",
        "saw",
        "fold",
        path_str(&data("running_terms.qcdnf")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["formula"].as_str().unwrap().starts_with("p cnf"));
}

#[test]
fn saw_td_follows_a_generated_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("alpha.qcdnf");
    let o = qbfstruct(&[
        "--seed",
        "4",
        "gen",
        "--planted",
        "alpha-td",
        "--vars",
        "6",
        "--k",
        "2",
        "--clauses",
        "4",
        "-o",
        path_str(&input),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let w: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("alpha.qcdnf.witness.json")).unwrap(),
    )
    .unwrap();
    let decomposition = dir.path().join("td.json");
    std::fs::write(&decomposition, w["witness"]["decomposition"].to_string()).unwrap();
    let out = dir.path().join("out.qcdnf");
    let o = qbfstruct(&[
        "saw",
        "td",
        path_str(&input),
        "--decomposition",
        path_str(&decomposition),
        "--normalize",
        "-o",
        path_str(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let plan: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out.qcdnf.plan.json")).unwrap(),
    )
    .unwrap();
    assert!(plan["decomposition"]["height"].is_number());
    let solve = |p: &Path| {
        stdout(&qbfstruct(&[
            "--var-budget",
            "64",
            "solve",
            "--strategy",
            "brute",
            path_str(p),
        ]))
    };
    assert_eq!(solve(&out), solve(&input));
}

#[test]
fn verify_reports_all_equivalences() {
    let o = qbfstruct(&["verify", "saw-fvs", "--seed", "7", "--count", "50"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "saw-fvs: 50/50 equivalences");
}

#[test]
fn generation_is_byte_identical_per_seed() {
    for planted in [
        "sparse-fvs",
        "fes",
        "c-deletion",
        "single-del",
        "e1a",
        "uni-complete",
    ] {
        let run = |seed: &str| {
            qbfstruct(&[
                "--seed",
                seed,
                "gen",
                "--planted",
                planted,
                "--vars",
                "9",
                "--k",
                "2",
            ])
        };
        let (a, b) = (run("5"), run("5"));
        assert_eq!(
            a.status.code(),
            Some(0),
            "{planted}: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        assert_eq!(a.stdout, b.stdout, "{planted}");
        assert_ne!(a.stdout, run("6").stdout, "{planted}");
    }
}

#[test]
fn inconsistent_generator_spec_is_a_precondition_failure() {
    let o = qbfstruct(&["gen", "--planted", "sparse-fvs", "--vars", "3", "--k", "5"]);
    assert_eq!(o.status.code(), Some(10));
}

#[test]
fn stats_and_params_report_graph_measures() {
    let o = qbfstruct(&["--json", "stats", path_str(&data("running.qcdnf"))]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["vars"], 4);
    assert_eq!(v["primal"]["edges"], 5);
    assert_eq!(v["primal"]["fes"], 2);
    let o = qbfstruct(&["--json", "params", path_str(&data("running.qcdnf"))]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["primal"]["fvs"].as_array().unwrap().len(), 1);
    assert_eq!(v["primal"]["vertex_cover"].as_array().unwrap().len(), 2);
}

#[test]
fn env_budget_guards_the_oracle() {
    let o = Command::new(env!("CARGO_BIN_EXE_qbfstruct"))
        .args([
            "solve",
            "--strategy",
            "brute",
            path_str(&data("running.qcdnf")),
        ])
        .env("QBFSTRUCT_VAR_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(10));
    let o = qbfstruct(&[
        "--var-budget",
        "2",
        "solve",
        "--strategy",
        "brute",
        path_str(&data("running.qcdnf")),
    ]);
    assert_eq!(o.status.code(), Some(10));
}
