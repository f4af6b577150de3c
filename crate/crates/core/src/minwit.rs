//! Minimal witnessing subsystems: location-, invariant- and volume-minimal
//! pipelines and the quotient-sum heuristic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::farkas::{
    build_system, induce_subsystem, max_polytope, min_polytope, support_max, support_min, FarkasError,
    FarkasSystem,
};
use crate::milp::{pareto_enumerate_with, solve_milp, LinearProgram, LpSession, Relation, Sense, Status};
use crate::model::{location_count, pta_volume, Direction, Pta, Strength, Witness};
use crate::numeric::Rational;
use crate::quotient::{proceed_violations, QuotientMdp};
use crate::reach::{reach_prob, verify_subsystem, ReachError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Notion {
    Loc,
    Inv,
    Vol,
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notion::Loc => "loc",
            Notion::Inv => "inv",
            Notion::Vol => "vol",
        })
    }
}

impl std::str::FromStr for Notion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "loc" => Ok(Notion::Loc),
            "inv" => Ok(Notion::Inv),
            "vol" => Ok(Notion::Vol),
            other => Err(format!("unknown notion `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinwitError {
    #[error("threshold exceeds Pr^* = {0}")]
    Infeasible(Rational),
    #[error("proceed assumption violated in {} state(s)", .0.len())]
    AssumptionViolated(Vec<usize>),
    #[error("some invariant is unbounded")]
    UnboundedInvariant,
    #[error("branch and bound node limit reached")]
    NodeLimit,
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Farkas(#[from] FarkasError),
    #[error(transparent)]
    Reach(#[from] ReachError),
}

/// One decoded witness with its measures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub witness: Witness,
    pub locations: Vec<String>,
    pub volume: Option<Rational>,
    /// MILP objective at the decoded solution (`Σζ` or `Σξ`).
    pub objective: Rational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizationReport {
    pub notion: Notion,
    pub direction: Direction,
    pub lambda: Rational,
    /// `Pr^dir` of the original model.
    pub probability: Rational,
    /// Location count, ξ-sum or volume, depending on `notion`.
    pub optimum: Rational,
    pub witnesses: Vec<Candidate>,
    /// Every Pareto-derived candidate (vol only).
    pub candidates: Vec<Candidate>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Options {
    /// Enumerate all co-optimal location sets (loc only).
    pub enumerate: bool,
}

/// Weight given to `ζ_l` after an LP assigned it 0.
pub const QS_WEIGHT_CAP: i64 = 1_000_000;

struct Setup {
    f: FarkasSystem,
    /// `Pr^dir` per quotient state.
    values: Vec<Rational>,
    probability: Rational,
}

fn setup(m: &QuotientMdp, lambda: &Rational, dir: Direction) -> Result<Setup, MinwitError> {
    let bad = proceed_violations(m);
    if !bad.is_empty() {
        return Err(MinwitError::AssumptionViolated(bad));
    }
    let f = build_system(m)?;
    let values = reach_prob(m, dir)?.values;
    let probability = values[m.initial].clone();
    if *lambda > probability {
        return Err(MinwitError::Infeasible(probability));
    }
    Ok(Setup { f, values, probability })
}

/// Non-absorbing locations that carry at least one quotient state, with the
/// columns of each.
fn columns_by_location(m: &QuotientMdp, f: &FarkasSystem) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (c, &s) in f.states.iter().enumerate() {
        out.entry(m.region(s).unwrap().location).or_default().push(c);
    }
    out
}

/// Base polytope plus, per column, the linking expression (the variables whose
/// positivity puts the state into the support) and its upper bound.
struct Linked {
    lp: LinearProgram,
    /// Per column: variables and a bound `U` with `Σ vars ≤ U` valid.
    link: Vec<(Vec<usize>, Rational)>,
}

fn linked_polytope(s: &Setup, lambda: &Rational, dir: Direction) -> Result<Linked, MinwitError> {
    let f = &s.f;
    match dir {
        Direction::Min => {
            let lp = min_polytope(f, lambda);
            let link = (0..f.columns()).map(|c| (vec![c], s.values[f.states[c]].clone())).collect();
            Ok(Linked { lp, link })
        }
        Direction::Max => {
            let lp = max_polytope(f, lambda);
            let mut session = LpSession::new(max_polytope(f, &Rational::zero()));
            let mut link = Vec::with_capacity(f.columns());
            for c in 0..f.columns() {
                let vars = f.rows_of[c].clone();
                let coeffs: Vec<_> = vars.iter().map(|&r| (r, Rational::one())).collect();
                let sol = session.optimize(Sense::Maximize, coeffs);
                let bound = match sol.status {
                    Status::Optimal => sol.objective.unwrap(),
                    Status::Unbounded => return Err(MinwitError::Solver("unbounded visit count".into())),
                    _ => return Err(MinwitError::Solver(format!("{:?} while bounding", sol.status))),
                };
                link.push((vars, bound));
            }
            Ok(Linked { lp, link })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn decode(
    t: &Pta,
    m: &QuotientMdp,
    f: &FarkasSystem,
    dir: Direction,
    lambda: &Rational,
    values: &[Rational],
    vars: usize,
    objective: Rational,
) -> Result<Candidate, MinwitError> {
    let support = match dir {
        Direction::Min => support_min(f, &values[..vars]),
        Direction::Max => support_max(f, &values[..vars]),
    };
    let support = if support.is_empty() && !m.is_target(m.initial) { vec![m.initial] } else { support };
    let mut w = induce_subsystem(t, m, &support, Strength::for_direction(dir))?;
    let check = verify_subsystem(t, &w.subsystem, dir, lambda)?;
    if !check.passed {
        return Err(MinwitError::Solver(format!(
            "decoded witness does not verify ({:?}, Pr = {:?})",
            check.structural, check.probability
        )));
    }
    w.verified_threshold = check.probability.unwrap();
    let locations = location_names(&w.subsystem);
    let volume = pta_volume(&w.subsystem);
    Ok(Candidate { witness: w, locations, volume, objective })
}

fn location_names(t: &Pta) -> Vec<String> {
    t.locations
        .iter()
        .enumerate()
        .filter(|(i, _)| !t.is_absorbing(*i))
        .map(|(_, l)| l.name.clone())
        .collect()
}

fn milp_optimal(lp: &LinearProgram) -> Result<Option<crate::milp::Solution>, MinwitError> {
    let sol = solve_milp(lp);
    match sol.status {
        Status::Optimal => Ok(Some(sol)),
        Status::Infeasible => Ok(None),
        Status::NodeLimit => Err(MinwitError::NodeLimit),
        Status::Unbounded => Err(MinwitError::Solver("unbounded MILP".into())),
    }
}

/// Location-minimal witness via the LOC-MILP `min Σ ζ_l`.
pub fn minimize_loc(
    t: &Pta,
    m: &QuotientMdp,
    lambda: &Rational,
    dir: Direction,
    opts: Options,
) -> Result<MinimizationReport, MinwitError> {
    let start = Instant::now();
    let s = setup(m, lambda, dir)?;
    let Linked { mut lp, link } = linked_polytope(&s, lambda, dir)?;
    let vars = lp.vars.len();
    let by_loc = columns_by_location(m, &s.f);
    let mut zeta = BTreeMap::new();
    for (&l, cols) in &by_loc {
        let z = lp.add_binary(format!("zeta_{}", t.locations[l].name));
        zeta.insert(l, z);
        for &c in cols {
            let (vs, u) = &link[c];
            let mut row: Vec<_> = vs.iter().map(|&v| (v, Rational::one())).collect();
            row.push((z, -u.clone()));
            lp.add_row(row, Relation::Le, Rational::zero());
        }
    }
    lp.set_objective(Sense::Minimize, zeta.values().map(|&z| (z, Rational::one())).collect());

    let Some(first) = milp_optimal(&lp)? else {
        return Err(MinwitError::Infeasible(s.probability));
    };
    let optimum = first.objective.clone().unwrap();
    let mut witnesses = Vec::new();
    let mut sol = first;
    loop {
        witnesses.push(decode(t, m, &s.f, dir, lambda, &sol.values, vars, optimum.clone())?);
        if !opts.enumerate {
            break;
        }
        if witnesses.len() == 1 {
            let all: Vec<_> = zeta.values().map(|&z| (z, Rational::one())).collect();
            lp.add_row(all, Relation::Le, optimum.clone());
        }
        // No-good cut on the chosen location pattern.
        let mut row = Vec::new();
        let mut ones = 0i64;
        for &z in zeta.values() {
            if sol.values[z].is_one() {
                row.push((z, -Rational::one()));
                ones += 1;
            } else {
                row.push((z, Rational::one()));
            }
        }
        lp.add_row(row, Relation::Ge, Rational::from_integer(1 - ones));
        match milp_optimal(&lp)? {
            Some(next) => sol = next,
            None => break,
        }
    }
    Ok(MinimizationReport {
        notion: Notion::Loc,
        direction: dir,
        lambda: lambda.clone(),
        probability: s.probability,
        optimum,
        witnesses,
        candidates: Vec::new(),
        elapsed: start.elapsed(),
    })
}

/// Index map of the invariant encoding `ξ^l_{ij}(k)`, `k ∈ [lo, hi]`, where
/// even `k` stands for the bound `(k/2, ≤)`, odd `k` for `(⌈k/2⌉, <)` and
/// `hi` for "unbounded".
///
/// Only levels that occur as an entry of some region DBM get a variable; a
/// skipped level is implied by the next stored one through the monotone
/// chain, so its contribution to `Σ_k ξ` is folded into that variable's
/// objective weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvEncoding {
    pub k: i64,
    pub lo: i64,
    pub hi: i64,
    /// `(location, i, j)` → stored levels `(k, variable)`, ascending in `k`.
    pub chains: BTreeMap<(usize, usize, usize), Vec<(i64, usize)>>,
}

impl InvEncoding {
    /// Number of levels per full chain (`4K + 3`).
    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Variable of the stored level `ξ^l_{ij}(k)`.
    pub fn var(&self, l: usize, i: usize, j: usize, k: i64) -> Option<usize> {
        let chain = self.chains.get(&(l, i, j))?;
        chain.iter().find(|(h, _)| *h == k).map(|(_, v)| *v)
    }

    /// Per-chain objectives `Σ_k ξ^l_{ij}(k)` over the stored variables.
    pub fn objectives(&self) -> Vec<Vec<(usize, Rational)>> {
        self.chains
            .values()
            .map(|levels| {
                let mut prev = self.lo - 1;
                levels
                    .iter()
                    .map(|&(h, v)| {
                        let w = h - prev;
                        prev = h;
                        (v, Rational::from_integer(w))
                    })
                    .collect()
            })
            .collect()
    }

    /// The full chain `ξ(lo), …, ξ(hi)` of `(l, i, j)` under assignment `x`.
    pub fn full_chain(&self, key: (usize, usize, usize), x: &[Rational]) -> Vec<Rational> {
        let levels = &self.chains[&key];
        (self.lo..=self.hi)
            .map(|k| match levels.iter().find(|(h, _)| *h >= k) {
                Some((_, v)) => x[*v].clone(),
                None => Rational::zero(),
            })
            .collect()
    }

    /// `true` iff every full chain is a 1…10…0 step vector.
    pub fn chains_monotone(&self, x: &[Rational]) -> bool {
        self.chains.keys().all(|&key| {
            let c = self.full_chain(key, x);
            c.iter().all(|v| v.is_zero() || v.is_one()) && c.windows(2).all(|w| w[1] <= w[0])
        })
    }
}

fn inv_program(
    t: &Pta,
    m: &QuotientMdp,
    s: &Setup,
    lambda: &Rational,
    dir: Direction,
) -> Result<(LinearProgram, InvEncoding, usize), MinwitError> {
    let Linked { mut lp, link } = linked_polytope(s, lambda, dir)?;
    let vars = lp.vars.len();
    let n = t.clock_count();
    let k = m.k;
    let (lo, hi) = (-2 * k - 1, 2 * k + 1);
    let by_loc = columns_by_location(m, &s.f);
    let pairs: Vec<(usize, usize)> = (0..=n)
        .flat_map(|i| (0..=n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && !(j == 0 && dir == Direction::Min))
        .collect();
    let level = |c: usize, i: usize, j: usize| -> i64 {
        let zone = m.region(s.f.states[c]).unwrap().zone();
        zone.get(i, j).half_index().map_or(hi, |h| h.clamp(lo, hi))
    };
    let mut enc = InvEncoding { k, lo, hi, chains: BTreeMap::new() };
    for (&l, cols) in &by_loc {
        let live: Vec<usize> = cols.iter().copied().filter(|&c| !link[c].1.is_zero()).collect();
        for &(i, j) in &pairs {
            let used: BTreeSet<i64> = live.iter().map(|&c| level(c, i, j)).collect();
            if used.is_empty() {
                continue;
            }
            let mut levels = Vec::with_capacity(used.len());
            for h in used {
                let v = lp.add_binary(format!("xi_{}_{i}_{j}_{h}", t.locations[l].name));
                if let Some(&(_, prev)) = levels.last() {
                    lp.add_row(vec![(v, Rational::one()), (prev, -Rational::one())], Relation::Le, Rational::zero());
                }
                levels.push((h, v));
            }
            enc.chains.insert((l, i, j), levels);
        }
        for &c in &live {
            let (vs, u) = &link[c];
            for &(i, j) in &pairs {
                let x = enc.var(l, i, j, level(c, i, j)).expect("stored level");
                let mut row: Vec<_> = vs.iter().map(|&v| (v, Rational::one())).collect();
                row.push((x, -u.clone()));
                lp.add_row(row, Relation::Le, Rational::zero());
            }
        }
    }
    Ok((lp, enc, vars))
}

/// Invariant-minimal witness via the INV-MILP `min Σ ξ`.
pub fn minimize_inv(
    t: &Pta,
    m: &QuotientMdp,
    lambda: &Rational,
    dir: Direction,
) -> Result<MinimizationReport, MinwitError> {
    let start = Instant::now();
    let s = setup(m, lambda, dir)?;
    let (mut lp, enc, vars) = inv_program(t, m, &s, lambda, dir)?;
    let all: Vec<_> = enc.objectives().into_iter().flatten().collect();
    lp.set_objective(Sense::Minimize, all);
    let Some(sol) = milp_optimal(&lp)? else {
        return Err(MinwitError::Infeasible(s.probability));
    };
    debug_assert!(enc.chains_monotone(&sol.values));
    let optimum = sol.objective.clone().unwrap();
    let w = decode(t, m, &s.f, dir, lambda, &sol.values, vars, optimum.clone())?;
    Ok(MinimizationReport {
        notion: Notion::Inv,
        direction: dir,
        lambda: lambda.clone(),
        probability: s.probability,
        optimum,
        witnesses: vec![w],
        candidates: Vec::new(),
        elapsed: start.elapsed(),
    })
}

/// Volume-minimal witness: Pareto frontier of the per-chain ξ-sums, decoded
/// and measured. The sweep stops early at a volume-0 witness.
pub fn minimize_vol(
    t: &Pta,
    m: &QuotientMdp,
    lambda: &Rational,
    dir: Direction,
) -> Result<MinimizationReport, MinwitError> {
    let start = Instant::now();
    let s = setup(m, lambda, dir)?;
    let (mut lp, enc, vars) = inv_program(t, m, &s, lambda, dir)?;
    lp.objectives = enc.objectives();
    let mut decoded: Vec<Result<Candidate, MinwitError>> = Vec::new();
    let frontier = pareto_enumerate_with(&lp, |work, point, x| {
        let obj: Rational = point.iter().sum();
        let cand = decode(t, m, &s.f, dir, lambda, x, vars, obj);
        let done = match &cand {
            Ok(c) => c.volume.as_ref().is_some_and(|v| v.is_zero()),
            Err(_) => true,
        };
        decoded.push(cand);
        if done {
            return false;
        }
        // f_k < p_k iff the top active level of chain k switches off.
        let tops: Vec<usize> = enc
            .chains
            .values()
            .zip(point)
            .filter(|(_, p)| p.is_positive())
            .map(|(levels, _)| levels.iter().rev().find(|(_, v)| x[*v].is_one()).unwrap().1)
            .collect();
        if tops.is_empty() {
            return false;
        }
        let row = tops.iter().map(|&v| (v, Rational::one())).collect();
        work.add_row(row, Relation::Le, Rational::from(tops.len() - 1));
        true
    })
    .map_err(|_| MinwitError::NodeLimit)?;
    if frontier.is_empty() {
        return Err(MinwitError::Infeasible(s.probability));
    }
    let candidates = decoded.into_iter().collect::<Result<Vec<_>, _>>()?;
    let best = candidates
        .iter()
        .filter_map(|c| c.volume.clone())
        .min()
        .ok_or(MinwitError::UnboundedInvariant)?;
    let witnesses = candidates.iter().filter(|c| c.volume.as_ref() == Some(&best)).cloned().collect();
    Ok(MinimizationReport {
        notion: Notion::Vol,
        direction: dir,
        lambda: lambda.clone(),
        probability: s.probability,
        optimum: best,
        witnesses,
        candidates,
        elapsed: start.elapsed(),
    })
}

/// Quotient-sum heuristic: reweighted LP relaxations of LOC-CONSTR.
pub fn qs_heuristic(
    t: &Pta,
    m: &QuotientMdp,
    lambda: &Rational,
    dir: Direction,
    iterations: usize,
) -> Result<MinimizationReport, MinwitError> {
    let start = Instant::now();
    let s = setup(m, lambda, dir)?;
    let Linked { mut lp, link } = linked_polytope(&s, lambda, dir)?;
    let vars = lp.vars.len();
    let by_loc = columns_by_location(m, &s.f);
    let mut zeta = BTreeMap::new();
    for (&l, cols) in &by_loc {
        let z = lp.add_var(format!("zeta_{}", t.locations[l].name), Some(Rational::zero()), Some(Rational::one()), crate::milp::VarKind::Continuous);
        zeta.insert(l, z);
        for &c in cols {
            let (vs, u) = &link[c];
            let mut row: Vec<_> = vs.iter().map(|&v| (v, Rational::one())).collect();
            row.push((z, -u.clone()));
            lp.add_row(row, Relation::Le, Rational::zero());
        }
    }
    let mut session = LpSession::new(lp);
    if !session.is_feasible() {
        return Err(MinwitError::Infeasible(s.probability));
    }
    let mut weights: BTreeMap<usize, Rational> = zeta.values().map(|&z| (z, Rational::one())).collect();
    let mut last = None;
    for _ in 0..iterations.max(1) {
        let sol = session.optimize(Sense::Minimize, weights.iter().map(|(&z, w)| (z, w.clone())).collect());
        if sol.status != Status::Optimal {
            return Err(MinwitError::Solver(format!("{:?} in heuristic LP", sol.status)));
        }
        let stable = zeta.values().all(|&z| sol.values[z].is_zero() || sol.values[z].is_one());
        for (&z, w) in weights.iter_mut() {
            let v = &sol.values[z];
            *w = if v.is_zero() { Rational::from_integer(QS_WEIGHT_CAP) } else { v.recip() };
        }
        last = Some(sol);
        if stable {
            break;
        }
    }
    let sol = last.unwrap();
    let mut w = decode(t, m, &s.f, dir, lambda, &sol.values, vars, Rational::zero())?;
    let count = Rational::from(location_count(&w.witness.subsystem));
    w.objective = count.clone();
    Ok(MinimizationReport {
        notion: Notion::Loc,
        direction: dir,
        lambda: lambda.clone(),
        probability: s.probability,
        optimum: count,
        witnesses: vec![w],
        candidates: Vec::new(),
        elapsed: start.elapsed(),
    })
}

/// Dispatch on the minimality notion.
pub fn minimize(
    t: &Pta,
    m: &QuotientMdp,
    lambda: &Rational,
    dir: Direction,
    notion: Notion,
    opts: Options,
) -> Result<MinimizationReport, MinwitError> {
    match notion {
        Notion::Loc => minimize_loc(t, m, lambda, dir, opts),
        Notion::Inv => minimize_inv(t, m, lambda, dir),
        Notion::Vol => minimize_vol(t, m, lambda, dir),
    }
}

/// Location sets (by name) of the report's witnesses.
pub fn location_sets(r: &MinimizationReport) -> BTreeSet<Vec<String>> {
    r.witnesses.iter().map(|c| c.locations.clone()).collect()
}
