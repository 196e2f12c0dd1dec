//! Python bindings. Structured results that have no natural Python class (plans,
//! traces, witnesses) cross the boundary as JSON text and are decoded on the Python side.

use std::collections::{BTreeMap, BTreeSet};

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;

use qbfstruct::formula::{self, Format, ParseOptions};
use qbfstruct::gen::{generate as gen_instance, GenSpec, Planted};
use qbfstruct::graphs::{build_graph, min_fes, GraphKind};
use qbfstruct::kernel;
use qbfstruct::saw::{self, IndexMode};
use qbfstruct::solvers::{self, Strategy};
use qbfstruct::verify::{run_verify, Transform, VerifyOptions, VERIFY_VAR_BUDGET};
use qbfstruct::{Assignment, Error, Matrix, Qbf, Var};

create_exception!(
    _native,
    PreconditionError,
    PyException,
    "An algorithmic precondition does not hold."
);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        e if e.is_precondition() => PreconditionError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn graph_kind(name: &str) -> PyResult<GraphKind> {
    name.parse().map_err(PyValueError::new_err)
}

/// A prenex quantified Boolean formula.
#[pyclass(module = "qbfstruct._native", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Formula {
    inner: Qbf,
}

#[pymethods]
impl Formula {
    /// Parse QDIMACS or qcdnf text; the format is detected when not given.
    #[staticmethod]
    #[pyo3(signature = (text, format=None, simplify_tautologies=true))]
    fn parse(text: &str, format: Option<&str>, simplify_tautologies: bool) -> PyResult<Formula> {
        let format = match format {
            Some(f) => f.parse::<Format>().map_err(PyValueError::new_err)?,
            None => Format::detect(text),
        };
        let inner = formula::parse(
            text,
            format,
            ParseOptions {
                simplify_tautologies,
            },
        )
        .map_err(to_py)?;
        Ok(Formula { inner })
    }

    #[pyo3(signature = (format=None))]
    fn to_text(&self, format: Option<&str>) -> PyResult<String> {
        let format = match format {
            Some(f) => f.parse::<Format>().map_err(PyValueError::new_err)?,
            None if matches!(self.inner.matrix, Matrix::Cdnf { .. }) => Format::Qcdnf,
            None => Format::Qdimacs,
        };
        formula::serialize(&self.inner, format).map_err(to_py)
    }

    #[getter]
    fn num_vars(&self) -> u32 {
        self.inner.num_vars
    }

    /// `(quantifier, variable)` pairs, outermost first; quantifiers are `"e"` or `"a"`.
    #[getter]
    fn prefix(&self) -> Vec<(String, Var)> {
        self.inner
            .prefix
            .iter()
            .map(|&(k, v)| (k.letter().to_string(), v))
            .collect()
    }

    #[getter]
    fn clauses(&self) -> Vec<Vec<i32>> {
        self.inner
            .clauses()
            .iter()
            .map(|c| c.iter().map(|l| l.dimacs()).collect())
            .collect()
    }

    #[getter]
    fn terms(&self) -> Vec<Vec<i32>> {
        self.inner
            .terms()
            .iter()
            .map(|t| t.iter().map(|l| l.dimacs()).collect())
            .collect()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    /// Brute-force truth value.
    #[pyo3(signature = (budget=None))]
    fn evaluate(&self, budget: Option<usize>) -> PyResult<bool> {
        match budget {
            Some(b) => formula::evaluate_with_budget(&self.inner, b),
            None => formula::evaluate(&self.inner),
        }
        .map_err(to_py)
    }

    fn negate(&self) -> Formula {
        Formula {
            inner: formula::negate(&self.inner),
        }
    }

    /// Restrict by a `{variable: bool}` mapping.
    fn restrict(&self, assignment: BTreeMap<Var, bool>) -> Formula {
        Formula {
            inner: formula::restrict(&self.inner, &Assignment(assignment)),
        }
    }

    /// Size of a minimum feedback edge set of the primal or incidence graph.
    #[pyo3(signature = (graph="primal"))]
    fn feedback_edge_number(&self, graph: &str) -> PyResult<usize> {
        Ok(min_fes(&build_graph(&self.inner, graph_kind(graph)?)).len())
    }

    fn __repr__(&self) -> String {
        format!(
            "Formula(vars={}, clauses={}, terms={}, depth={})",
            self.inner.prefix.len(),
            self.inner.clauses().len(),
            self.inner.terms().len(),
            self.inner.depth()
        )
    }

    fn __str__(&self) -> PyResult<String> {
        self.to_text(None)
    }
}

/// Decide a formula; returns `(value, strategy, indices)`.
#[pyfunction]
#[pyo3(signature = (formula, strategy="auto", deletion_set=None, c=None))]
fn solve(
    formula: &Formula,
    strategy: &str,
    deletion_set: Option<BTreeSet<Var>>,
    c: Option<usize>,
) -> PyResult<(bool, String, BTreeMap<String, usize>)> {
    let strategy: Strategy = strategy
        .parse()
        .map_err(|e: Error| PyValueError::new_err(e.to_string()))?;
    let report =
        solvers::solve(&formula.inner, strategy, deletion_set.as_ref(), c).map_err(to_py)?;
    Ok((
        report.value,
        report.strategy.name().to_string(),
        report.indices,
    ))
}

/// Kernelize; returns `(kernel, verdict, result_json)` where the JSON holds stats and trace.
#[pyfunction]
#[pyo3(signature = (formula, graph="primal"))]
fn kernelize(formula: &Formula, graph: &str) -> PyResult<(Formula, Option<bool>, String)> {
    let res = kernel::kernelize(&formula.inner, graph_kind(graph)?).map_err(to_py)?;
    let detail = json(&serde_json::json!({ "stats": res.stats, "trace": res.trace }))?;
    Ok((Formula { inner: res.kernel }, res.verdict, detail))
}

/// Sparse-FVS reduction; returns `(formula, new_set, plan_json)`.
#[pyfunction]
#[pyo3(signature = (formula, source, dedicated=false, normalize=false))]
fn saw_fvs(
    formula: &Formula,
    source: BTreeSet<Var>,
    dedicated: bool,
    normalize: bool,
) -> PyResult<(Formula, Vec<Var>, String)> {
    let mode = if dedicated {
        IndexMode::Dedicated
    } else {
        IndexMode::Standard
    };
    let (mut out, s_prime, plan) =
        saw::saw_reduce_fvs_with(&formula.inner, &source, mode).map_err(to_py)?;
    if normalize {
        out = saw::normalize_3dnf(&out).map_err(to_py)?.0;
    }
    Ok((Formula { inner: out }, s_prime, json(&plan)?))
}

/// Merge the singleton side of a formula into one clause or term.
#[pyfunction]
fn fold(formula: &Formula) -> PyResult<Formula> {
    Ok(Formula {
        inner: saw::fold_1dnf_into_clause(&formula.inner).map_err(to_py)?,
    })
}

/// Planted instance; returns `(formula, witness_json)`.
#[pyfunction]
#[pyo3(signature = (planted, vars, seed, k=2, c=2, depth=3, width=3, clauses=None))]
#[allow(clippy::too_many_arguments)]
fn generate(
    planted: &str,
    vars: usize,
    seed: u64,
    k: usize,
    c: usize,
    depth: usize,
    width: usize,
    clauses: Option<usize>,
) -> PyResult<(Formula, String)> {
    let planted = match planted {
        "sparse-fvs" => Planted::SparseFvs { k },
        "fes" => Planted::Fes { k },
        "c-deletion" => Planted::CDeletion { k, c },
        "single-del" => Planted::SingleDel { c },
        "e1a" => Planted::E1a { k, c },
        "uni-complete" => Planted::UniComplete { k, c },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown planted structure {other}"
            )))
        }
    };
    let g = gen_instance(&GenSpec {
        vars,
        depth,
        width,
        clauses,
        planted,
        seed,
    })
    .map_err(to_py)?;
    Ok((Formula { inner: g.formula }, json(&g.witness)?))
}

/// Oracle check of a transformation on `count` generated instances; returns
/// `(passed, skipped, failure_json)` with `failure_json` set on a mismatch.
#[pyfunction]
#[pyo3(signature = (transform, seed=0, count=50, budget=None))]
fn verify(
    transform: &str,
    seed: u64,
    count: usize,
    budget: Option<usize>,
) -> PyResult<(usize, usize, Option<String>)> {
    let t: Transform = transform
        .parse()
        .map_err(|e: Error| PyValueError::new_err(e.to_string()))?;
    let opts = VerifyOptions {
        seed,
        count,
        budget: budget.unwrap_or(VERIFY_VAR_BUDGET),
        threads: 0,
    };
    let report = run_verify(t, opts).map_err(to_py)?;
    let failure = report.failure.as_ref().map(json).transpose()?;
    Ok((report.passed, report.skipped, failure))
}

#[pymodule]
fn _native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Add the classes and functions to `m`; also used to embed the module in Rust tests.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Formula>()?;
    m.add("PreconditionError", m.py().get_type::<PreconditionError>())?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(kernelize, m)?)?;
    m.add_function(wrap_pyfunction!(saw_fvs, m)?)?;
    m.add_function(wrap_pyfunction!(fold, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
