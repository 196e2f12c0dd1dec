use std::collections::BTreeSet;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use serde_json::{json, Value};

use qbfstruct::formula::{parse, serialize, Format, ParseOptions};
use qbfstruct::gen::{generate, GenSpec, Planted};
use qbfstruct::graphs::{
    build_graph, min_degree_decomposition, min_deletion_set, min_fes, var_set, AlphaTd,
    DeletionKind, GraphKind, TreeDecomposition, TreedepthDecomposition,
};
use qbfstruct::kernel::kernelize;
use qbfstruct::saw::{
    cdnf_to_cnf_via_td, extend_treedepth, fold_1dnf_into_clause, normalize_3dnf,
    saw_reduce_fvs_with, saw_reduce_treedepth, IndexMode,
};
use qbfstruct::solvers::{solve, Strategy};
use qbfstruct::verify::{run_verify, Transform, VerifyOptions, VERIFY_VAR_BUDGET};
use qbfstruct::{Error, Matrix, Qbf, Var};

use crate::{Cli, Command, GenArgs, GraphArg, InputFormat, PlantedArg, SawCommand, SawOutput};

/// Exit status when verification finds a mismatch.
const EXIT_MISMATCH: u8 = 2;

pub fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(budget) = cli.global.var_budget {
        // The library reads the oracle budget from the environment; we are still single-threaded here.
        std::env::set_var("QBFSTRUCT_VAR_BUDGET", budget.to_string());
    }
    let g = &cli.global;
    match &cli.command {
        Command::Stats { input } => stats(cli, &read_formula(cli, input)?),
        Command::Params { input, k, c } => params(cli, &read_formula(cli, input)?, *k, *c),
        Command::Solve {
            input,
            strategy,
            deletion_set,
            c,
        } => {
            let q = read_formula(cli, input)?;
            let strategy: Strategy = strategy.parse().map_err(|e| anyhow!("{e}"))?;
            let d: Option<BTreeSet<Var>> =
                deletion_set.as_ref().map(|v| v.iter().copied().collect());
            let report = solve(&q, strategy, d.as_ref(), *c)?;
            if g.json {
                println!("{}", serde_json::to_string(&report)?);
            } else {
                println!("{}", if report.value { "TRUE" } else { "FALSE" });
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Kernelize {
            input,
            graph,
            output,
            trace,
        } => {
            let q = read_formula(cli, input)?;
            let kind = match graph {
                GraphArg::Primal => GraphKind::Primal,
                GraphArg::Incidence => GraphKind::Incidence,
            };
            let res = kernelize(&q, kind)?;
            let text = serialize(&res.kernel, Format::Qdimacs)?;
            let sidecar = json!({ "verdict": res.verdict, "stats": res.stats, "trace": res.trace });
            if g.json {
                println!(
                    "{}",
                    serde_json::to_string(&json!({ "kernel": text, "result": sidecar }))?
                );
            } else {
                write_output(output.as_deref(), &text)?;
            }
            if let Some(path) = sidecar_path(trace, output, ".trace.json") {
                write_json(&path, &sidecar)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Saw(cmd) => saw(cli, cmd),
        Command::Verify { transform, count } => verify(cli, transform, *count),
        Command::Gen(args) => gen(cli, args),
    }
}

fn read_formula(cli: &Cli, path: &Path) -> Result<Qbf> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading stdin")?;
    } else {
        text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    let format = match cli.global.format {
        Some(InputFormat::Qdimacs) => Format::Qdimacs,
        Some(InputFormat::Qcdnf) => Format::Qcdnf,
        None => Format::detect(&text),
    };
    let opts = ParseOptions {
        simplify_tautologies: !cli.global.strict,
    };
    parse(&text, format, opts).with_context(|| format!("parsing {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// The explicit sidecar path, else the output path with `suffix` appended.
fn sidecar_path(
    explicit: &Option<PathBuf>,
    output: &Option<PathBuf>,
    suffix: &str,
) -> Option<PathBuf> {
    explicit.clone().or_else(|| {
        output.as_ref().map(|o| {
            let mut s = o.clone().into_os_string();
            s.push(suffix);
            PathBuf::from(s)
        })
    })
}

/// Formulas with both parts only have a qcdnf form.
fn natural_format(q: &Qbf) -> Format {
    match q.matrix {
        Matrix::Cdnf { .. } => Format::Qcdnf,
        _ => Format::Qdimacs,
    }
}

fn matrix_kind(q: &Qbf) -> &'static str {
    match q.matrix {
        Matrix::Cnf(_) => "cnf",
        Matrix::Dnf(_) => "dnf",
        Matrix::Cdnf { .. } => "cdnf",
    }
}

fn stats(cli: &Cli, q: &Qbf) -> Result<ExitCode> {
    let primal = build_graph(q, GraphKind::Primal);
    let incidence = build_graph(q, GraphKind::Incidence);
    let value = json!({
        "vars": q.prefix.len(),
        "clauses": q.clauses().len(),
        "terms": q.terms().len(),
        "size": q.size(),
        "depth": q.depth(),
        "innermost": q.innermost().map(|k| k.letter().to_string()),
        "matrix": matrix_kind(q),
        "primal": { "vertices": primal.vertex_count(), "edges": primal.edge_count(), "fes": min_fes(&primal).len() },
        "incidence": { "vertices": incidence.vertex_count(), "edges": incidence.edge_count(), "fes": min_fes(&incidence).len() },
    });
    print_value(cli, &value);
    Ok(ExitCode::SUCCESS)
}

fn params(cli: &Cli, q: &Qbf, k: usize, c: Option<usize>) -> Result<ExitCode> {
    let primal = build_graph(q, GraphKind::Primal);
    let incidence = build_graph(q, GraphKind::Incidence);
    let smallest = |g, q: Option<&Qbf>, kind| -> Value {
        match min_deletion_set(g, q, kind, k) {
            Some(set) => json!(set.iter().map(ToString::to_string).collect::<Vec<_>>()),
            None => json!(format!("more than {k}")),
        }
    };
    let td = min_degree_decomposition(&primal);
    let mut value = json!({
        "primal": {
            "fes": min_fes(&primal).len(),
            "vertex_cover": smallest(&primal, None, DeletionKind::VertexCover),
            "fvs": smallest(&primal, None, DeletionKind::Fvs),
            "sparse_fvs": smallest(&primal, Some(q), DeletionKind::SparseFvs),
            "treewidth_upper_bound": td.width(),
        },
        "incidence": {
            "fes": min_fes(&incidence).len(),
            "vertex_cover": smallest(&incidence, None, DeletionKind::VertexCover),
            "fvs": smallest(&incidence, None, DeletionKind::Fvs),
        },
    });
    if let Some(c) = c {
        value["primal"]["c_deletion"] = smallest(&primal, None, DeletionKind::CDeletion(c));
    }
    print_value(cli, &value);
    Ok(ExitCode::SUCCESS)
}

/// JSON as is, or one `key: value` line per leaf.
fn print_value(cli: &Cli, value: &Value) {
    if cli.global.json {
        println!("{value}");
        return;
    }
    fn walk(prefix: &str, v: &Value) {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, child);
                }
            }
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|i| i.as_str().map_or(i.to_string(), str::to_owned))
                    .collect();
                println!("{prefix}: {{{}}}", parts.join(","));
            }
            Value::String(s) => println!("{prefix}: {s}"),
            other => println!("{prefix}: {other}"),
        }
    }
    walk("", value);
}

fn treedepth_json(td: &TreedepthDecomposition) -> Value {
    let entries: Vec<Value> = td
        .parent
        .iter()
        .map(|(v, p)| json!({ "vertex": v.to_string(), "parent": p.map(|p| p.to_string()) }))
        .collect();
    json!({ "height": td.height(), "parent": entries })
}

fn tree_json(td: &TreeDecomposition) -> Value {
    let bags: Vec<Vec<String>> = td
        .bags
        .iter()
        .map(|b| b.iter().map(ToString::to_string).collect())
        .collect();
    json!({ "width": td.width(), "bags": bags, "parent": td.parent })
}

fn emit_saw(cli: &Cli, io: &SawOutput, out: &Qbf, plan: Value) -> Result<ExitCode> {
    let text = serialize(out, natural_format(out))?;
    if cli.global.json {
        println!(
            "{}",
            serde_json::to_string(&json!({ "formula": text, "plan": plan }))?
        );
    } else {
        write_output(io.output.as_deref(), &text)?;
    }
    if let Some(path) = sidecar_path(&io.plan, &io.output, ".plan.json") {
        write_json(&path, &plan)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn saw(cli: &Cli, cmd: &SawCommand) -> Result<ExitCode> {
    match cmd {
        SawCommand::Fvs {
            io,
            set,
            k,
            dedicated,
            normalize,
        } => {
            let q = read_formula(cli, &io.input)?;
            let source: BTreeSet<Var> = match set {
                Some(s) => s.iter().copied().collect(),
                None => {
                    let g = build_graph(&q, GraphKind::Primal);
                    let found = min_deletion_set(&g, Some(&q), DeletionKind::SparseFvs, *k)
                        .ok_or_else(|| {
                            Error::Precondition(format!(
                                "no sparse feedback vertex set of size at most {k}"
                            ))
                        })?;
                    var_set(&found)
                }
            };
            let mode = if *dedicated {
                IndexMode::Dedicated
            } else {
                IndexMode::Standard
            };
            let (mut out, s_prime, plan) = saw_reduce_fvs_with(&q, &source, mode)?;
            let mut chains = Vec::new();
            if *normalize {
                (out, chains) = normalize_3dnf(&out)?;
            }
            let plan =
                json!({ "source": source, "s_prime": s_prime, "plan": plan, "splits": chains });
            emit_saw(cli, io, &out, plan)
        }
        SawCommand::Td {
            io,
            decomposition,
            normalize,
        } => {
            let q = read_formula(cli, &io.input)?;
            let text = fs::read_to_string(decomposition)
                .with_context(|| format!("reading {}", decomposition.display()))?;
            let alpha: AlphaTd = serde_json::from_str(&text)
                .with_context(|| format!("parsing decomposition {}", decomposition.display()))?;
            let (mut out, mut td, plan) = saw_reduce_treedepth(&q, &alpha)?;
            let mut chains = Vec::new();
            if *normalize {
                (out, chains) = normalize_3dnf(&out)?;
                td = extend_treedepth(&td, &chains);
            }
            let plan =
                json!({ "plan": plan, "splits": chains, "decomposition": treedepth_json(&td) });
            emit_saw(cli, io, &out, plan)
        }
        SawCommand::TdCnf { io } => {
            let q = read_formula(cli, &io.input)?;
            let td = min_degree_decomposition(&build_graph(&q, GraphKind::Primal));
            let (out, td2) = cdnf_to_cnf_via_td(&q, &td)?;
            let plan =
                json!({ "input_decomposition": tree_json(&td), "decomposition": tree_json(&td2) });
            emit_saw(cli, io, &out, plan)
        }
        SawCommand::Fold { io } => {
            let q = read_formula(cli, &io.input)?;
            let out = fold_1dnf_into_clause(&q)?;
            emit_saw(cli, io, &out, json!({ "folded_into": matrix_kind(&out) }))
        }
    }
}

fn verify(cli: &Cli, name: &str, count: usize) -> Result<ExitCode> {
    let transforms = if name == "all" {
        Transform::all()
    } else {
        vec![name.parse().map_err(|e| anyhow!("{e}"))?]
    };
    let opts = VerifyOptions {
        seed: cli.global.seed,
        count,
        budget: cli.global.var_budget.unwrap_or(VERIFY_VAR_BUDGET),
        threads: cli.global.threads,
    };
    let mut reports = Vec::new();
    for t in transforms {
        let report = run_verify(t, opts)?;
        let ok = report.ok();
        if !cli.global.json {
            match &report.failure {
                None => {
                    let skipped = if report.skipped > 0 {
                        format!(" ({} over budget)", report.skipped)
                    } else {
                        String::new()
                    };
                    println!(
                        "{}: {}/{} equivalences{skipped}",
                        report.transform, report.passed, report.count
                    );
                }
                Some(f) => {
                    println!(
                        "{}: MISMATCH on instance {} (seed {}): {}",
                        report.transform, f.index, f.instance_seed, f.message
                    );
                    println!("minimized reproducer:\n{}", f.reproducer_text);
                    if let Some(w) = &f.reproducer.witness {
                        println!("witness: {}", serde_json::to_string(w)?);
                    }
                }
            }
        }
        reports.push(report);
        if !ok {
            break;
        }
    }
    if cli.global.json {
        println!("{}", serde_json::to_string(&reports)?);
    }
    let failed = reports.iter().any(|r| !r.ok());
    Ok(if failed {
        ExitCode::from(EXIT_MISMATCH)
    } else {
        ExitCode::SUCCESS
    })
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<ExitCode> {
    let planted = match a.planted {
        PlantedArg::SparseFvs => Planted::SparseFvs { k: a.k },
        PlantedArg::Fes => Planted::Fes { k: a.k },
        PlantedArg::CDeletion => Planted::CDeletion { k: a.k, c: a.c },
        PlantedArg::SingleDel => Planted::SingleDel { c: a.c },
        PlantedArg::E1a => Planted::E1a { k: a.k, c: a.c },
        PlantedArg::UniComplete => Planted::UniComplete { k: a.k, c: a.c },
        PlantedArg::AlphaTd => {
            let rest = a.vars.saturating_sub(a.k);
            Planted::AlphaTd {
                h: a.k,
                hung: rest - rest / 3,
                path_vars: rest / 3,
            }
        }
    };
    let spec = GenSpec {
        vars: a.vars,
        depth: a.depth,
        width: a.width,
        clauses: a.clauses,
        planted,
        seed: cli.global.seed,
    };
    let g = generate(&spec)?;
    let text = serialize(&g.formula, natural_format(&g.formula))?;
    let witness = json!({ "spec": spec, "witness": g.witness });
    if cli.global.json {
        println!(
            "{}",
            serde_json::to_string(&json!({ "formula": text, "witness": witness }))?
        );
    } else {
        write_output(a.output.as_deref(), &text)?;
    }
    if let Some(path) = sidecar_path(&a.witness, &a.output, ".witness.json") {
        write_json(&path, &witness)?;
    }
    Ok(ExitCode::SUCCESS)
}
