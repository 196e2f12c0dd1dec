use super::{Qbf, Quant, Var};
use crate::error::{Error, Result};

pub const DEFAULT_VAR_BUDGET: usize = 26;

/// The oracle's variable budget: `QBFSTRUCT_VAR_BUDGET` if set, else the default.
pub fn var_budget() -> usize {
    std::env::var("QBFSTRUCT_VAR_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_VAR_BUDGET)
}

/// Brute-force truth value under the default budget.
pub fn evaluate(q: &Qbf) -> Result<bool> {
    evaluate_with_budget(q, var_budget())
}

struct Frame {
    pos: usize,
    second: bool,
}

/// Brute-force truth value by exhaustive game-tree search on an explicit stack.
///
/// Prefix variables that do not occur in the matrix are skipped; the budget
/// counts only the variables that are actually branched on.
pub fn evaluate_with_budget(q: &Qbf, budget: usize) -> Result<bool> {
    let used = q.matrix.vars();
    let order: Vec<(Quant, Var)> = q
        .prefix
        .iter()
        .copied()
        .filter(|(_, v)| used.contains(v))
        .collect();
    if order.len() > budget {
        return Err(Error::VarBudget {
            vars: order.len(),
            budget,
        });
    }
    let size = q.num_vars as usize + 1;
    let mut value: Vec<Option<bool>> = vec![None; size];
    let status = |value: &[Option<bool>]| q.matrix.status(|v| value[v as usize]);

    let mut stack: Vec<Frame> = Vec::with_capacity(order.len());
    let mut depth = 0usize;
    loop {
        // Descend with 0-branches until the matrix value is decided.
        let result = loop {
            if let Some(r) = status(&value) {
                break r;
            }
            let (_, v) = order[depth];
            value[v as usize] = Some(false);
            stack.push(Frame {
                pos: depth,
                second: false,
            });
            depth += 1;
        };
        // Propagate upwards until some frame still needs its 1-branch.
        loop {
            let Some(frame) = stack.last_mut() else {
                return Ok(result);
            };
            let (quant, v) = order[frame.pos];
            let decisive = match quant {
                Quant::Exists => result,
                Quant::Forall => !result,
            };
            if decisive || frame.second {
                value[v as usize] = None;
                stack.pop();
                continue;
            }
            frame.second = true;
            value[v as usize] = Some(true);
            depth = frame.pos + 1;
            break;
        }
    }
}
