//! Random game components for the game-layer checks.

use rand::seq::SliceRandom;
use rand::Rng;

use qbfstruct::formula::{Clause, Lit, Matrix, Qbf, Quant, Var};
use qbfstruct::solvers::GameComponent;

use super::{oracle, random_quant, strategy_exists};

const E: Quant = Quant::Exists;
const A: Quant = Quant::Forall;

/// One component `F` over `locals` and `e` inside a prefix that may also hold
/// variables outside `F`; `e` is innermost.
pub struct RandomGame {
    pub q: Qbf,
    pub e: Var,
    pub clauses: Vec<Clause>,
}

pub fn random_game(r: &mut impl Rng, max_locals: u32) -> RandomGame {
    let locals = r.gen_range(1..=max_locals);
    let fillers = r.gen_range(0..=1u32);
    let e = locals + fillers + 1;
    let mut order: Vec<Var> = (1..e).collect();
    order.shuffle(r);
    let mut prefix: Vec<(Quant, Var)> = order.into_iter().map(|v| (random_quant(r), v)).collect();
    prefix.push((E, e));
    let pool: Vec<Var> = (1..=locals).chain([e]).collect();
    let clauses: Vec<Clause> = (0..r.gen_range(1..=4))
        .map(|_| {
            let w = r.gen_range(1..=3.min(pool.len()));
            pool.choose_multiple(r, w)
                .map(|&v| Lit::new(v, r.gen_bool(0.5)))
                .collect()
        })
        .collect();
    let q = Qbf::new(e, prefix, Matrix::Cnf(clauses.clone())).unwrap();
    RandomGame { q, e, clauses }
}

impl RandomGame {
    pub fn component(&self) -> GameComponent {
        GameComponent::new(&self.q, self.e, self.clauses.clone()).unwrap()
    }

    /// Truth of the game over the variables after index `i` with `F[β][e=σ]`.
    pub fn rest_value(&self, i: usize, values: &[Option<bool>], sigma: bool) -> bool {
        let mut fixed: Vec<Option<bool>> = values.to_vec();
        fixed[self.e as usize] = Some(sigma);
        let clauses: Vec<Clause> = self
            .clauses
            .iter()
            .filter(|c| {
                !c.iter()
                    .any(|l| fixed[l.var() as usize] == Some(l.is_positive()))
            })
            .map(|c| {
                c.iter()
                    .copied()
                    .filter(|l| fixed[l.var() as usize].is_none())
                    .collect()
            })
            .collect();
        let prefix: Vec<(Quant, Var)> = self.q.prefix[i..self.q.prefix.len() - 1].to_vec();
        oracle(&Qbf::new(self.q.num_vars, prefix, Matrix::Cnf(clauses)).unwrap())
    }

    /// Index-`i` property by enumerating explicit strategies of `player` over the
    /// first `i` prefix variables.
    pub fn by_enumeration(&self, player: Quant, empower: bool, i: usize) -> bool {
        let phase = &self.q.prefix[..i];
        let goal = |values: &[Option<bool>]| {
            let each = |s: bool| {
                let v = self.rest_value(i, values, s);
                if player == A {
                    !v
                } else {
                    v
                }
            };
            if empower {
                each(true) || each(false)
            } else {
                each(true) && each(false)
            }
        };
        strategy_exists(self.q.num_vars, phase, player, &goal)
    }
}

/// Disjoint copies of `games` sharing only `e`, their prefixes merged at random
/// while keeping each one's order. Returns the formula, `e` and the clauses of each game.
pub fn combine(r: &mut impl Rng, games: &[&RandomGame]) -> (Qbf, Var, Vec<Vec<Clause>>) {
    let e = 1 + games.iter().map(|g| g.e - 1).sum::<Var>();
    let mut runs: Vec<Vec<(Quant, Var)>> = Vec::new();
    let mut parts: Vec<Vec<Clause>> = Vec::new();
    let mut shift = 0;
    for g in games {
        let rename = |v: Var| if v == g.e { e } else { v + shift };
        runs.push(
            g.q.prefix[..g.q.prefix.len() - 1]
                .iter()
                .map(|&(k, v)| (k, rename(v)))
                .collect(),
        );
        parts.push(
            g.clauses
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|l| Lit::new(rename(l.var()), l.is_positive()))
                        .collect()
                })
                .collect(),
        );
        shift += g.e - 1;
    }
    let mut cursors = vec![0; runs.len()];
    let mut prefix = Vec::new();
    loop {
        let open: Vec<usize> = (0..runs.len())
            .filter(|&i| cursors[i] < runs[i].len())
            .collect();
        let Some(&i) = open.choose(r) else { break };
        prefix.push(runs[i][cursors[i]]);
        cursors[i] += 1;
    }
    prefix.push((E, e));
    let all: Vec<Clause> = parts.iter().flatten().cloned().collect();
    (Qbf::new(e, prefix, Matrix::Cnf(all)).unwrap(), e, parts)
}
