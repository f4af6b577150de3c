//! Exact minimal and maximal reachability probabilities on quotient MDPs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{solve_lp, LinearProgram, Relation, Sense, Status};
use crate::model::{is_strong_subsystem, is_subsystem, Direction, Pta, SubsystemViolation, Witness};
use crate::numeric::Rational;
use crate::quotient::{build_quotient, proceed_violations, QuotientError, QuotientMdp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("proceed assumption violated in {} state(s)", .0.len())]
    AssumptionViolated(Vec<usize>),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error("reachability LP did not solve to optimality")]
    Solver,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachResult {
    pub values: Vec<Rational>,
    pub direction: Direction,
    /// States resolved by graph analysis (value 0, value 1) and by the LP.
    pub zero_states: usize,
    pub one_states: usize,
    pub lp_states: usize,
}

impl ReachResult {
    pub fn at(&self, s: usize) -> &Rational {
        &self.values[s]
    }
}

/// States that can reach `target` under some scheduler (target included).
fn exists_reach(m: &QuotientMdp, target: &[bool], within: &[bool]) -> Vec<bool> {
    let mut r = target.to_vec();
    loop {
        let mut changed = false;
        for s in 0..m.len() {
            if r[s] || !within[s] {
                continue;
            }
            if m.choices[s].iter().any(|c| c.dist.iter().any(|(t, _)| r[*t])) {
                r[s] = true;
                changed = true;
            }
        }
        if !changed {
            return r;
        }
    }
}

/// States with maximal probability 1 (nested fixpoint).
fn prob1e(m: &QuotientMdp) -> Vec<bool> {
    let n = m.len();
    let mut goal = vec![false; n];
    goal[m.goal] = true;
    let mut u = vec![true; n];
    loop {
        let mut r = goal.clone();
        loop {
            let mut changed = false;
            for s in 0..n {
                if r[s] || !u[s] {
                    continue;
                }
                let ok = m.choices[s].iter().any(|c| {
                    c.dist.iter().all(|(t, _)| u[*t]) && c.dist.iter().any(|(t, _)| r[*t])
                });
                if ok {
                    r[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if r == u {
            return u;
        }
        u = r;
    }
}

/// States where some scheduler avoids goal surely (deadlocks included).
fn prob0a(m: &QuotientMdp) -> Vec<bool> {
    let n = m.len();
    let mut x: Vec<bool> = (0..n).map(|s| s != m.goal).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !x[s] || m.choices[s].is_empty() {
                continue;
            }
            if !m.choices[s].iter().any(|c| c.dist.iter().all(|(t, _)| x[*t])) {
                x[s] = false;
                changed = true;
            }
        }
        if !changed {
            return x;
        }
    }
}

/// Exact `Pr^dir(◇goal)` for every state.
///
/// Graph precomputation fixes the value-0 and value-1 states; the rest come
/// from one LP (least fixpoint for max, greatest for min).
pub fn reach_prob(m: &QuotientMdp, dir: Direction) -> Result<ReachResult, ReachError> {
    let n = m.len();
    let all = vec![true; n];
    let (zero, one) = match dir {
        Direction::Max => {
            let mut goal = vec![false; n];
            goal[m.goal] = true;
            let can = exists_reach(m, &goal, &all);
            let zero: Vec<bool> = can.iter().map(|c| !c).collect();
            (zero, prob1e(m))
        }
        Direction::Min => {
            let bad = proceed_violations(m);
            if !bad.is_empty() {
                return Err(ReachError::AssumptionViolated(bad));
            }
            let zero = prob0a(m);
            let pre = exists_reach(m, &zero, &all);
            let one: Vec<bool> = pre.iter().map(|p| !p).collect();
            (zero, one)
        }
    };
    let mut values = vec![Rational::zero(); n];
    let mut var_of = vec![None; n];
    let mut lp = LinearProgram::new();
    for s in 0..n {
        if one[s] {
            values[s] = Rational::one();
        } else if !zero[s] {
            var_of[s] = Some(lp.add_nonneg(format!("x{s}")));
        }
    }
    let lp_states = var_of.iter().flatten().count();
    if lp_states > 0 {
        for s in 0..n {
            let Some(xs) = var_of[s] else { continue };
            for c in &m.choices[s] {
                let mut coeffs = vec![(xs, Rational::one())];
                let mut rhs = Rational::zero();
                for (t, p) in &c.dist {
                    if let Some(xt) = var_of[*t] {
                        if xt == xs {
                            coeffs[0].1 -= p;
                        } else {
                            coeffs.push((xt, -p));
                        }
                    } else if one[*t] {
                        rhs += p;
                    }
                }
                let rel = if dir == Direction::Max { Relation::Ge } else { Relation::Le };
                lp.add_row(coeffs, rel, rhs);
            }
        }
        let sum: Vec<_> = (0..lp.vars.len()).map(|j| (j, Rational::one())).collect();
        let sense = if dir == Direction::Max { Sense::Minimize } else { Sense::Maximize };
        lp.set_objective(sense, sum);
        let sol = solve_lp(&lp);
        if sol.status != Status::Optimal {
            return Err(ReachError::Solver);
        }
        for s in 0..n {
            if let Some(xs) = var_of[s] {
                values[s] = sol.values[xs].clone();
            }
        }
    }
    Ok(ReachResult {
        values,
        direction: dir,
        zero_states: zero.iter().filter(|z| **z).count(),
        one_states: one.iter().filter(|o| **o).count(),
        lp_states,
    })
}

/// `Pr^dir` of the initial state of `t`, with clamp constant `k`.
pub fn pta_probability(t: &Pta, k: i64, dir: Direction) -> Result<Rational, ReachError> {
    let m = build_quotient(t, k)?;
    Ok(reach_prob(&m, dir)?.values[m.initial].clone())
}

/// Outcome of checking a candidate witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub structural: Result<(), SubsystemViolation>,
    pub probability: Option<Rational>,
    pub passed: bool,
}

/// Structural check (strong for min) plus `Pr^dir(sub) ≥ λ`, with the
/// original's clamp constant.
pub fn verify_subsystem(
    t: &Pta,
    sub: &Pta,
    dir: Direction,
    lambda: &Rational,
) -> Result<Verification, ReachError> {
    let structural = match dir {
        Direction::Min => is_strong_subsystem(t, sub),
        Direction::Max => is_subsystem(t, sub),
    };
    if structural.is_err() {
        return Ok(Verification { structural, probability: None, passed: false });
    }
    let k = t.clamp().max(sub.max_constant());
    let p = pta_probability(sub, k, dir)?;
    let passed = p >= *lambda;
    Ok(Verification { structural, probability: Some(p), passed })
}

pub fn verify_witness(t: &Pta, w: &Witness, lambda: &Rational) -> Result<bool, ReachError> {
    Ok(verify_subsystem(t, &w.subsystem, w.direction, lambda)?.passed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn goal_initial_is_one() {
        let t = parse("clocks x; loc g goal init; loc f fail;").unwrap();
        assert_eq!(pta_probability(&t, 0, Direction::Min).unwrap(), Rational::one());
        assert_eq!(pta_probability(&t, 0, Direction::Max).unwrap(), Rational::one());
    }

    #[test]
    fn choice_between_branches() {
        let src = "clocks x; loc a inv \"x<=1\" init; loc g goal; loc f fail;
            trans a act u { 1/3 -> g; 2/3 -> f; };
            trans a act v { 3/4 -> g; 1/4 -> f; };";
        let t = parse(src).unwrap();
        assert_eq!(pta_probability(&t, 1, Direction::Max).unwrap(), Rational::new(3, 4));
        assert_eq!(pta_probability(&t, 1, Direction::Min).unwrap(), Rational::new(1, 3));
    }

    #[test]
    fn retry_loop() {
        // retry with prob 1/2 until goal or fail
        let src = "clocks x; loc a inv \"x<=0\" init; loc g goal; loc f fail;
            trans a act u { 1/2 -> a; 1/4 -> g; 1/4 -> f; };";
        let t = parse(src).unwrap();
        assert_eq!(pta_probability(&t, 1, Direction::Min).unwrap(), Rational::new(1, 2));
    }

    #[test]
    fn deadlock_min_is_rejected() {
        let src = "clocks x; loc a inv \"x<=1\" init; loc g goal; loc f fail;
            trans a guard \"x>=2\" act u { 1 -> g; };";
        let t = parse(src).unwrap();
        assert!(matches!(pta_probability(&t, 2, Direction::Min), Err(ReachError::AssumptionViolated(_))));
        assert_eq!(pta_probability(&t, 2, Direction::Max).unwrap(), Rational::zero());
    }
}
