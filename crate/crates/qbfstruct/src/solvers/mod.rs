//! Solving strategies: caching DPLL, clause deduplication, deletion-set expansion
//! and component typing, the `∃≤1∀` pruning solver, the universally-complete solver
//! and the single-deletion game algorithm.

mod cache;
mod deletion;
mod game;

pub use cache::{
    solve_clause_dedup, solve_vc_cache, solve_vc_cache_with, CacheOptions, CacheStats, DedupReport,
};
pub use deletion::{
    check_deletion_set, component_type, component_types, deletion_components, e1a_keep_count,
    expand_universal_deletions, forced_assignments, forces_assignment, prune_all_e1a,
    prune_e1a_components, solve_e1a, solve_universally_complete, CompleteReport, ComponentType,
    Expansion, SigVar, MAX_ENUMERATED_DELETION_SET,
};
pub use game::{
    lc_ee, solve_single_deletion, DecidedBy, GameComponent, GameIndexReport, Player, QueryMode,
    SingleDeletionReport, StrategyQuery,
};

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{evaluate, Qbf, Var};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Auto,
    Brute,
    VcCache,
    Dedup,
    E1a,
    UniComplete,
    SingleDel,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Auto,
        Strategy::Brute,
        Strategy::VcCache,
        Strategy::Dedup,
        Strategy::E1a,
        Strategy::UniComplete,
        Strategy::SingleDel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Auto => "auto",
            Strategy::Brute => "brute",
            Strategy::VcCache => "vc-cache",
            Strategy::Dedup => "dedup",
            Strategy::E1a => "e1a",
            Strategy::UniComplete => "uni-complete",
            Strategy::SingleDel => "single-del",
        }
    }

    /// Whether the strategy needs a deletion set.
    pub fn needs_deletion_set(self) -> bool {
        matches!(
            self,
            Strategy::E1a | Strategy::UniComplete | Strategy::SingleDel
        )
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::pre(format!("unknown strategy {s}")))
    }
}

/// Verdict with the strategy that produced it and any indices it computed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub value: bool,
    pub strategy: Strategy,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub indices: BTreeMap<String, usize>,
}

/// Solve with the chosen strategy. `Auto` picks the single-deletion solver for a
/// one-variable deletion set, the `∃≤1∀` solver when every component has that
/// form, the universally-complete solver when it applies, and the caching solver
/// otherwise.
pub fn solve(
    q: &Qbf,
    strategy: Strategy,
    deletion_set: Option<&BTreeSet<Var>>,
    c: Option<usize>,
) -> Result<SolveReport> {
    let needs_set = || {
        deletion_set
            .ok_or_else(|| Error::pre(format!("strategy {} needs a deletion set", strategy.name())))
    };
    let mut indices = BTreeMap::new();
    let done = |value, strategy, indices| {
        Ok(SolveReport {
            value,
            strategy,
            indices,
        })
    };
    match strategy {
        Strategy::Auto => {
            if let Some(d) = deletion_set {
                check_deletion_set(q, d, c)?;
                let attempt = if d.len() == 1 {
                    solve(q, Strategy::SingleDel, Some(d), c)
                } else if q.matrix.is_cnf()
                    && component_types(q, d)?
                        .keys()
                        .all(ComponentType::is_exists_le1_forall)
                {
                    solve(q, Strategy::E1a, Some(d), c)
                } else {
                    solve(q, Strategy::UniComplete, Some(d), c)
                };
                match attempt {
                    Err(e) if e.is_precondition() => {}
                    other => return other,
                }
            }
            solve(q, Strategy::VcCache, None, c)
        }
        Strategy::Brute => done(evaluate(q)?, strategy, indices),
        Strategy::VcCache => done(solve_vc_cache(q)?, strategy, indices),
        Strategy::Dedup => {
            let r = solve_clause_dedup(q)?;
            indices.insert("distinct_clauses".into(), r.distinct_clauses);
            done(r.value, strategy, indices)
        }
        Strategy::E1a => {
            let d = needs_set()?;
            check_deletion_set(q, d, c)?;
            done(solve_e1a(q, d)?, strategy, indices)
        }
        Strategy::UniComplete => {
            let d = needs_set()?;
            check_deletion_set(q, d, c)?;
            let r = solve_universally_complete(q, d)?;
            indices.insert("types".into(), r.types);
            done(r.value, strategy, indices)
        }
        Strategy::SingleDel => {
            let d = needs_set()?;
            let [e] = d.iter().copied().collect::<Vec<_>>()[..] else {
                return Err(Error::pre(
                    "the single-deletion solver needs exactly one deletion variable",
                ));
            };
            let r = solve_single_deletion(q, e, c)?;
            if let Some(lc) = r.lc {
                indices.insert("LC".into(), lc);
            }
            if let Some(ee) = r.ee_min {
                indices.insert("EE_min".into(), ee);
            }
            done(r.value, strategy, indices)
        }
    }
}
