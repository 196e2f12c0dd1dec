use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::deletion::{check_deletion_set, deletion_components, expand_universal_deletions};
use crate::error::{Error, Result};
use crate::formula::{
    eliminate_innermost, evaluate, evaluate_with_budget, induced, Assignment, Clause, Matrix, Qbf,
    Quant, Var,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    Existential,
    Universal,
}

impl Player {
    fn quant(self) -> Quant {
        match self {
            Player::Existential => Quant::Exists,
            Player::Universal => Quant::Forall,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    /// One universal strategy that forbids every target value of the deletion variable.
    Forbids,
    /// One existential strategy that permits every target value.
    Permits,
    EmpowersAt(usize),
    LeavesChoiceAt(usize),
}

/// A question about strategies on one component. `targets` lists values of the
/// deletion variable and is only read by `Forbids` and `Permits`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyQuery {
    pub player: Player,
    pub mode: QueryMode,
    pub targets: Vec<bool>,
}

/// Strategy indices and forbid/permit flags of one component.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameIndexReport {
    /// Latest index where a universal strategy leaves a choice.
    pub lc: Option<usize>,
    /// Earliest index where a universal strategy empowers.
    pub ee: Option<usize>,
    pub forbids_true: bool,
    pub forbids_false: bool,
    pub forbids_both: bool,
    pub permits_true: bool,
    pub permits_false: bool,
    pub permits_both: bool,
}

/// One component of a formula whose single deletion variable `e` is existential
/// and innermost. Indices count prefix variables before `e`: index `i` covers the
/// first `i` of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameComponent {
    num_vars: u32,
    /// Component variables other than `e`, in prefix order, with global positions.
    local: Vec<(Quant, Var, usize)>,
    clauses: Vec<Clause>,
    e: Var,
    /// Number of prefix variables before `e`.
    ell: usize,
}

impl GameComponent {
    pub fn new(q: &Qbf, e: Var, clauses: Vec<Clause>) -> Result<Self> {
        match q.prefix.last() {
            Some(&(Quant::Exists, last)) if last == e => {}
            _ => {
                return Err(Error::pre(format!(
                    "deletion variable {e} is not innermost existential"
                )))
            }
        }
        let used: BTreeSet<Var> = clauses.iter().flatten().map(|l| l.var()).collect();
        let positions = q.positions();
        if let Some(v) = used.iter().find(|v| !positions.contains_key(v)) {
            return Err(Error::pre(format!("variable {v} not quantified")));
        }
        let local = q
            .prefix
            .iter()
            .enumerate()
            .filter(|(_, (_, v))| *v != e && used.contains(v))
            .map(|(i, &(k, v))| (k, v, i))
            .collect();
        Ok(GameComponent {
            num_vars: q.num_vars,
            local,
            clauses,
            e,
            ell: q.prefix.len() - 1,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn vars(&self) -> Vec<Var> {
        self.local.iter().map(|l| l.1).collect()
    }

    /// The component QBF after `beta`, with `e` fixed to each value in `e_values`
    /// (the copies of the matrix are conjoined), or left innermost when `None`.
    fn residual(&self, beta: &Assignment, e_values: Option<&[bool]>) -> Qbf {
        let prefix: Vec<(Quant, Var)> = self
            .local
            .iter()
            .filter(|l| !beta.contains(l.1))
            .map(|l| (l.0, l.1))
            .collect();
        let q = |prefix, clauses| Qbf {
            num_vars: self.num_vars,
            prefix,
            matrix: Matrix::Cnf(clauses),
        };
        match e_values {
            None => {
                let mut prefix = prefix;
                prefix.push((Quant::Exists, self.e));
                let clauses = restrict_clauses(&self.clauses, beta);
                q(prefix, clauses)
            }
            Some(values) => {
                let clauses = values
                    .iter()
                    .flat_map(|&ev| {
                        let mut a = beta.clone();
                        a.set(self.e, ev);
                        restrict_clauses(&self.clauses, &a)
                    })
                    .collect();
                q(prefix, clauses)
            }
        }
    }

    fn value(&self, beta: &Assignment, e_values: Option<&[bool]>) -> bool {
        // Components are small by assumption; the global budget guards whole formulas.
        evaluate_with_budget(&self.residual(beta, e_values), usize::MAX)
            .expect("an unlimited budget never fails")
    }

    fn forbids_in(&self, beta: &Assignment, sigma: &[bool]) -> bool {
        if sigma.len() == 2 {
            !self.value(beta, None)
        } else {
            sigma.iter().all(|&s| !self.value(beta, Some(&[s])))
        }
    }

    fn permits_in(&self, beta: &Assignment, sigma: &[bool]) -> bool {
        self.value(beta, Some(sigma))
    }

    /// A single universal strategy forbids every value in `sigma`.
    pub fn forbids(&self, sigma: &[bool]) -> bool {
        self.forbids_in(&Assignment::new(), &dedup(sigma))
    }

    /// A single existential strategy permits every value in `sigma`.
    pub fn permits(&self, sigma: &[bool]) -> bool {
        self.permits_in(&Assignment::new(), &dedup(sigma))
    }

    /// Whether the end-of-phase condition holds for `player` after `beta`.
    fn phase_goal(&self, player: Player, empower: bool, beta: &Assignment) -> bool {
        let each = |s: bool| match player {
            Player::Universal => self.forbids_in(beta, &[s]),
            Player::Existential => self.permits_in(beta, &[s]),
        };
        if empower {
            each(true) || each(false)
        } else {
            each(true) && each(false)
        }
    }

    /// Minimax over the first `cut` component variables: can `player` steer every
    /// play into the goal?
    fn phase_game(&self, player: Player, empower: bool, cut: usize, beta: &mut Assignment) -> bool {
        let k = beta.len();
        if k == cut {
            return self.phase_goal(player, empower, beta);
        }
        let (quant, v, _) = self.local[k];
        let mine = quant == player.quant();
        let mut any = false;
        let mut all = true;
        for value in [false, true] {
            beta.set(v, value);
            let r = self.phase_game(player, empower, cut, beta);
            beta.0.remove(&v);
            any |= r;
            all &= r;
            if (mine && any) || (!mine && !all) {
                break;
            }
        }
        if mine {
            any
        } else {
            all
        }
    }

    /// Component variables inside the first `i` prefix positions.
    fn cut(&self, i: usize) -> usize {
        self.local.iter().take_while(|l| l.2 < i).count()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i > self.ell {
            return Err(Error::pre(format!("index {i} exceeds {}", self.ell)));
        }
        Ok(())
    }

    pub fn empowers_at(&self, player: Player, i: usize) -> Result<bool> {
        self.check_index(i)?;
        Ok(self.phase_game(player, true, self.cut(i), &mut Assignment::new()))
    }

    pub fn leaves_choice_at(&self, player: Player, i: usize) -> Result<bool> {
        self.check_index(i)?;
        Ok(self.phase_game(player, false, self.cut(i), &mut Assignment::new()))
    }

    pub fn query(&self, query: &StrategyQuery) -> Result<bool> {
        match (query.mode, query.player) {
            (QueryMode::Forbids, Player::Universal) => Ok(self.forbids(&query.targets)),
            (QueryMode::Permits, Player::Existential) => Ok(self.permits(&query.targets)),
            (QueryMode::Forbids, _) => Err(Error::pre("only the universal player forbids")),
            (QueryMode::Permits, _) => Err(Error::pre("only the existential player permits")),
            (QueryMode::EmpowersAt(i), p) => self.empowers_at(p, i),
            (QueryMode::LeavesChoiceAt(i), p) => self.leaves_choice_at(p, i),
        }
    }

    /// Index ranges sharing one phase: cut `k` covers indices `lo..=hi`.
    fn cut_ranges(&self) -> Vec<(usize, usize, usize)> {
        (0..=self.local.len())
            .map(|k| {
                let lo = if k == 0 { 0 } else { self.local[k - 1].2 + 1 };
                let hi = self.local.get(k).map_or(self.ell, |l| l.2);
                (k, lo, hi)
            })
            .collect()
    }

    /// `LC`, the latest index where a universal strategy leaves a choice.
    pub fn lc(&self) -> Option<usize> {
        self.cut_ranges()
            .into_iter()
            .rev()
            .find(|&(k, _, _)| self.phase_game(Player::Universal, false, k, &mut Assignment::new()))
            .map(|(_, _, hi)| hi)
    }

    /// `EE`, the earliest index where a universal strategy empowers.
    pub fn ee(&self) -> Option<usize> {
        self.cut_ranges()
            .into_iter()
            .find(|&(k, _, _)| self.phase_game(Player::Universal, true, k, &mut Assignment::new()))
            .map(|(_, lo, _)| lo)
    }

    pub fn report(&self) -> GameIndexReport {
        GameIndexReport {
            lc: self.lc(),
            ee: self.ee(),
            forbids_true: self.forbids(&[true]),
            forbids_false: self.forbids(&[false]),
            forbids_both: self.forbids(&[false, true]),
            permits_true: self.permits(&[true]),
            permits_false: self.permits(&[false]),
            permits_both: self.permits(&[false, true]),
        }
    }
}

fn dedup(sigma: &[bool]) -> Vec<bool> {
    let set: BTreeSet<bool> = sigma.iter().copied().collect();
    set.into_iter().collect()
}

fn restrict_clauses(clauses: &[Clause], a: &Assignment) -> Vec<Clause> {
    clauses
        .iter()
        .filter(|c| !c.iter().any(|l| a.get(l.var()).is_some_and(|v| l.eval(v))))
        .map(|c| c.iter().copied().filter(|l| !a.contains(l.var())).collect())
        .collect()
}

/// `LC` and `EE` of the component formed by `clauses` in `q`.
pub fn lc_ee(q: &Qbf, e: Var, clauses: Vec<Clause>) -> Result<(Option<usize>, Option<usize>)> {
    let comp = GameComponent::new(q, e, clauses)?;
    Ok((comp.lc(), comp.ee()))
}

/// Which step of the single-deletion algorithm settled the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecidedBy {
    /// The deletion variable was universal; the expanded components were solved apart.
    UniversalExpansion,
    FalseComponent,
    AtMostOneLeft,
    MissingForbidder,
    DistinctForbidders,
    IndexComparison,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleDeletionReport {
    pub value: bool,
    pub decided_by: DecidedBy,
    /// `LC` of the component that can forbid either value, when compared.
    pub lc: Option<usize>,
    /// Minimum `EE` over the other remaining components, when compared.
    pub ee_min: Option<usize>,
    /// Components after discarding those that permit both values.
    pub remaining: usize,
}

/// Group the clauses by the component of `G − e` they touch; clauses over `e`
/// alone form their own group.
fn component_clauses(q: &Qbf, e: Var) -> Vec<Vec<Clause>> {
    let comps = deletion_components(q, &BTreeSet::from([e]));
    let owner: BTreeMap<Var, usize> = comps
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&v| (v, i)))
        .collect();
    let mut groups: Vec<Vec<Clause>> = vec![Vec::new(); comps.len() + 1];
    for c in q.clauses() {
        let slot = c
            .iter()
            .find_map(|l| owner.get(&l.var()).copied())
            .unwrap_or(comps.len());
        groups[slot].push(c.clone());
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Decide a CNF formula whose deletion set is the single variable `e`.
///
/// A universal `e` is expanded away, after which the components are independent.
/// An existential `e` is made innermost by eliminating later variables; then each
/// component is classified by which values of `e` the universal player can forbid,
/// and a lone component able to forbid either value is compared by its `LC` index
/// against the smallest `EE` index of the others.
pub fn solve_single_deletion(q: &Qbf, e: Var, c: Option<usize>) -> Result<SingleDeletionReport> {
    if !matches!(q.matrix, Matrix::Cnf(_)) {
        return Err(Error::pre("the single-deletion solver needs a CNF matrix"));
    }
    let d = BTreeSet::from([e]);
    check_deletion_set(q, &d, c)?;
    let report = |value, decided_by, lc, ee_min, remaining| SingleDeletionReport {
        value,
        decided_by,
        lc,
        ee_min,
        remaining,
    };

    if q.quant_of(e) == Some(Quant::Forall) {
        let exp = expand_universal_deletions(q, &d)?;
        let f = &exp.formula;
        if f.clauses().iter().any(Vec::is_empty) {
            return Ok(report(false, DecidedBy::UniversalExpansion, None, None, 0));
        }
        let comps = deletion_components(f, &BTreeSet::new());
        let mut value = true;
        for comp in &comps {
            if !evaluate(&induced(f, &comp.iter().copied().collect()))? {
                value = false;
                break;
            }
        }
        return Ok(report(
            value,
            DecidedBy::UniversalExpansion,
            None,
            None,
            comps.len(),
        ));
    }

    let mut q = q.clone();
    while let Some(&(_, last)) = q.prefix.last() {
        if last == e {
            break;
        }
        q = eliminate_innermost(&q, last)?;
    }
    if q.clauses().iter().any(Vec::is_empty) {
        return Ok(report(false, DecidedBy::FalseComponent, None, None, 0));
    }
    let comps: Vec<GameComponent> = component_clauses(&q, e)
        .into_iter()
        .map(|cl| GameComponent::new(&q, e, cl))
        .collect::<Result<_>>()?;

    if comps.iter().any(|f| f.forbids(&[false, true])) {
        return Ok(report(
            false,
            DecidedBy::FalseComponent,
            None,
            None,
            comps.len(),
        ));
    }
    let rest: Vec<GameComponent> = comps
        .into_iter()
        .filter(|f| !f.permits(&[false, true]))
        .collect();
    if rest.len() <= 1 {
        return Ok(report(
            true,
            DecidedBy::AtMostOneLeft,
            None,
            None,
            rest.len(),
        ));
    }
    let forbid_true: Vec<usize> = (0..rest.len())
        .filter(|&i| rest[i].forbids(&[true]))
        .collect();
    let forbid_false: Vec<usize> = (0..rest.len())
        .filter(|&i| rest[i].forbids(&[false]))
        .collect();
    if forbid_true.is_empty() || forbid_false.is_empty() {
        return Ok(report(
            true,
            DecidedBy::MissingForbidder,
            None,
            None,
            rest.len(),
        ));
    }
    if forbid_true
        .iter()
        .any(|i| forbid_false.iter().any(|j| i != j))
    {
        return Ok(report(
            false,
            DecidedBy::DistinctForbidders,
            None,
            None,
            rest.len(),
        ));
    }
    let i = forbid_true[0];
    let lc = rest[i].lc();
    let ee_min = (0..rest.len())
        .filter(|&j| j != i)
        .filter_map(|j| rest[j].ee())
        .min();
    let value = match (ee_min, lc) {
        (Some(ee), Some(lc)) => ee > lc,
        _ => true,
    };
    Ok(report(
        value,
        DecidedBy::IndexComparison,
        lc,
        ee_min,
        rest.len(),
    ))
}
