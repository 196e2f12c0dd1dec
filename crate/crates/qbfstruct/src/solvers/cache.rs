use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{canonical_sets, restrict, Assignment, Matrix, Qbf, Quant, Var};

/// Knobs of the caching DPLL solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheOptions {
    pub enabled: bool,
    /// Give up with [`Error::CacheBudget`] once the cache would exceed this size.
    pub max_entries: Option<usize>,
}

impl Default for CacheOptions {
    fn default() -> Self {
        CacheOptions {
            enabled: true,
            max_entries: Some(1 << 22),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    /// Search nodes visited.
    pub nodes: usize,
    pub hits: usize,
    pub entries: usize,
}

/// Canonical form of a residual matrix: sorted, duplicate-free clause and term lists.
fn canonical(m: &Matrix) -> Matrix {
    match m {
        Matrix::Cnf(c) => Matrix::Cnf(canonical_sets(c)),
        Matrix::Dnf(d) => Matrix::Dnf(canonical_sets(d)),
        Matrix::Cdnf {
            cnf,
            dnf,
            orientation,
        } => Matrix::Cdnf {
            cnf: canonical_sets(cnf),
            dnf: canonical_sets(dnf),
            orientation: *orientation,
        },
    }
}

struct Search<'a> {
    prefix: &'a [(Quant, Var)],
    num_vars: u32,
    opts: CacheOptions,
    cache: HashMap<(usize, Matrix), bool>,
    stats: CacheStats,
}

impl Search<'_> {
    fn assign(&self, m: &Matrix, v: Var, value: bool) -> Matrix {
        let q = Qbf {
            num_vars: self.num_vars,
            prefix: vec![],
            matrix: m.clone(),
        };
        let a: Assignment = [(v, value)].into_iter().collect();
        canonical(&restrict(&q, &a).matrix)
    }

    fn solve(&mut self, pos: usize, m: Matrix) -> Result<bool> {
        self.stats.nodes += 1;
        if let Some(value) = m.status(|_| None) {
            return Ok(value);
        }
        let used = m.vars();
        let Some(next) = (pos..self.prefix.len()).find(|&i| used.contains(&self.prefix[i].1))
        else {
            unreachable!("an undetermined matrix has an unassigned prefix variable");
        };
        let key = (next, m);
        if self.opts.enabled {
            if let Some(&value) = self.cache.get(&key) {
                self.stats.hits += 1;
                return Ok(value);
            }
        }
        let (quant, v) = self.prefix[next];
        let mut value = quant == Quant::Forall;
        for branch in [false, true] {
            let child = self.assign(&key.1, v, branch);
            let r = self.solve(next + 1, child)?;
            if r != value {
                value = r;
                break;
            }
        }
        if self.opts.enabled {
            if self
                .opts
                .max_entries
                .is_some_and(|max| self.cache.len() >= max)
            {
                return Err(Error::CacheBudget(self.cache.len()));
            }
            self.cache.insert(key, value);
            self.stats.entries = self.cache.len();
        }
        Ok(value)
    }
}

/// DPLL-style backtracking in prefix order with formula caching: the value of every
/// residual matrix is stored under its prefix position and canonical form.
pub fn solve_vc_cache(q: &Qbf) -> Result<bool> {
    solve_vc_cache_with(q, CacheOptions::default()).map(|(v, _)| v)
}

pub fn solve_vc_cache_with(q: &Qbf, opts: CacheOptions) -> Result<(bool, CacheStats)> {
    let mut search = Search {
        prefix: &q.prefix,
        num_vars: q.num_vars,
        opts,
        cache: HashMap::new(),
        stats: CacheStats::default(),
    };
    let value = search.solve(0, canonical(&q.matrix))?;
    Ok((value, search.stats))
}

/// Outcome of solving after clause deduplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupReport {
    pub value: bool,
    pub input_clauses: usize,
    pub distinct_clauses: usize,
}

/// Drop repeated clauses (as literal sets) and solve the rest with the caching solver.
pub fn solve_clause_dedup(q: &Qbf) -> Result<DedupReport> {
    let Matrix::Cnf(clauses) = &q.matrix else {
        return Err(Error::pre("clause deduplication needs a CNF matrix"));
    };
    let distinct = canonical_sets(clauses);
    let reduced = Qbf {
        num_vars: q.num_vars,
        prefix: q.prefix.clone(),
        matrix: Matrix::Cnf(distinct),
    };
    let value = solve_vc_cache(&reduced)?;
    Ok(DedupReport {
        value,
        input_clauses: clauses.len(),
        distinct_clauses: reduced.clauses().len(),
    })
}
