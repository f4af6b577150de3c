//! Farkas systems of quotient MDPs, certificate checks and induced subsystems.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dbm::Dbm;
use crate::milp::{solve_lp, LinearProgram, Relation, Sense, Status};
use crate::model::{
    Branch, ClockConstraint, Direction, Location, Pta, Strength, Transition, Witness,
};
use crate::numeric::Rational;
use crate::quotient::{proceed_violations, QuotientMdp};
use crate::region::ClockRegion;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FarkasError {
    #[error("proceed assumption violated in {} state(s)", .0.len())]
    AssumptionViolated(Vec<usize>),
    #[error("certificate has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty region set")]
    EmptySupport,
    #[error("the initial region is not in the region set")]
    InitialRegionMissing,
}

/// Row `(s, α)` of `A` and entry of `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarkasRow {
    /// Column (index into `states`) of the source state.
    pub state: usize,
    /// Choice index within the quotient state.
    pub choice: usize,
    pub coeffs: Vec<(usize, Rational)>,
    pub b: Rational,
}

/// `A ∈ R^{M×S}` and `b` with `(Az)(s,α) = z(s) − Σ_{s′∈S} P(s,α,s′) z(s′)`
/// and `b(s,α) = P(s,α,goal)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FarkasSystem {
    /// Quotient ids of the columns.
    pub states: Vec<usize>,
    /// Column of each quotient state (`None` for goal and fail).
    pub column: Vec<Option<usize>>,
    pub rows: Vec<FarkasRow>,
    /// Rows of each column.
    pub rows_of: Vec<Vec<usize>>,
    /// Column of the initial state, if it is not goal or fail.
    pub initial: Option<usize>,
    /// Quotient id of the initial state.
    pub initial_state: usize,
    pub initial_is_goal: bool,
}

impl FarkasSystem {
    pub fn columns(&self) -> usize {
        self.states.len()
    }
}

/// Builds `(A, b)`; requires the proceed assumption.
pub fn build_system(m: &QuotientMdp) -> Result<FarkasSystem, FarkasError> {
    let bad = proceed_violations(m);
    if !bad.is_empty() {
        return Err(FarkasError::AssumptionViolated(bad));
    }
    let states = m.region_states();
    let mut column = vec![None; m.len()];
    for (c, &s) in states.iter().enumerate() {
        column[s] = Some(c);
    }
    let mut rows = Vec::new();
    let mut rows_of = vec![Vec::new(); states.len()];
    for (c, &s) in states.iter().enumerate() {
        for (ci, ch) in m.choices[s].iter().enumerate() {
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            acc.insert(c, Rational::one());
            let mut b = Rational::zero();
            for (t, p) in &ch.dist {
                if *t == m.goal {
                    b += p;
                } else if let Some(tc) = column[*t] {
                    *acc.entry(tc).or_default() -= p;
                }
            }
            let coeffs = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            rows_of[c].push(rows.len());
            rows.push(FarkasRow { state: c, choice: ci, coeffs, b });
        }
    }
    Ok(FarkasSystem {
        initial: column[m.initial],
        initial_state: m.initial,
        initial_is_goal: m.initial == m.goal,
        states,
        column,
        rows,
        rows_of,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub direction: Direction,
    /// Per column (min) or per row (max).
    pub vector: Vec<Rational>,
    pub lambda: Rational,
}

impl Certificate {
    /// Audit listing, one `state-id = p/q` line per non-zero entry.
    pub fn listing(&self, f: &FarkasSystem) -> String {
        let mut out = String::new();
        for (i, v) in self.vector.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            match self.direction {
                Direction::Min => out.push_str(&format!("{} = {}\n", f.states[i], v)),
                Direction::Max => {
                    let r = &f.rows[i];
                    out.push_str(&format!("{}.{} = {}\n", f.states[r.state], r.choice, v))
                }
            }
        }
        out
    }
}

/// Exact membership in `P_min(λ)` or `P_max(λ)`.
pub fn is_certificate(f: &FarkasSystem, c: &Certificate) -> Result<bool, FarkasError> {
    let expected = match c.direction {
        Direction::Min => f.columns(),
        Direction::Max => f.rows.len(),
    };
    if c.vector.len() != expected {
        return Err(FarkasError::DimensionMismatch { expected, got: c.vector.len() });
    }
    if c.vector.iter().any(|v| v.is_negative()) {
        return Ok(false);
    }
    match c.direction {
        Direction::Min => {
            for r in &f.rows {
                let lhs: Rational = r.coeffs.iter().map(|(j, a)| a * &c.vector[*j]).sum();
                if lhs > r.b {
                    return Ok(false);
                }
            }
            let z0 = match f.initial {
                Some(col) => c.vector[col].clone(),
                None if f.initial_is_goal => Rational::one(),
                None => Rational::zero(),
            };
            Ok(z0 >= c.lambda)
        }
        Direction::Max => {
            let mut col = vec![Rational::zero(); f.columns()];
            let mut yb = Rational::zero();
            for (i, r) in f.rows.iter().enumerate() {
                let y = &c.vector[i];
                if y.is_zero() {
                    continue;
                }
                for (j, a) in &r.coeffs {
                    col[*j] += y * a;
                }
                yb += y * &r.b;
            }
            for (j, v) in col.iter().enumerate() {
                let delta = if Some(j) == f.initial { Rational::one() } else { Rational::zero() };
                if *v > delta {
                    return Ok(false);
                }
            }
            if f.initial_is_goal {
                yb += Rational::one();
            }
            Ok(yb >= c.lambda)
        }
    }
}

/// `supp(z)` as quotient ids.
pub fn support_min(f: &FarkasSystem, z: &[Rational]) -> Vec<usize> {
    (0..f.columns()).filter(|&j| z[j].is_positive()).map(|j| f.states[j]).collect()
}

/// `supp_S(y)` as quotient ids.
pub fn support_max(f: &FarkasSystem, y: &[Rational]) -> Vec<usize> {
    let set: BTreeSet<usize> =
        f.rows.iter().enumerate().filter(|(i, _)| y[*i].is_positive()).map(|(_, r)| f.states[r.state]).collect();
    set.into_iter().collect()
}

/// `P_min(λ)` as LP rows over variables `0..|S|`, plus the index of `z(s0)`.
pub fn min_polytope(f: &FarkasSystem, lambda: &Rational) -> LinearProgram {
    let mut lp = LinearProgram::new();
    for &s in &f.states {
        lp.add_nonneg(format!("z{s}"));
    }
    for r in &f.rows {
        lp.add_row(r.coeffs.clone(), Relation::Le, r.b.clone());
    }
    match f.initial {
        Some(c) => {
            lp.add_row(vec![(c, Rational::one())], Relation::Ge, lambda.clone());
        }
        None => {
            let v = if f.initial_is_goal { Rational::one() } else { Rational::zero() };
            // Constant constraint `v ≥ λ`.
            lp.add_row(Vec::new(), Relation::Ge, lambda - &v);
        }
    }
    lp
}

/// `P_max(λ)` as LP rows over variables `0..|rows|`.
pub fn max_polytope(f: &FarkasSystem, lambda: &Rational) -> LinearProgram {
    let mut lp = LinearProgram::new();
    for r in &f.rows {
        lp.add_nonneg(format!("y{}_{}", f.states[r.state], r.choice));
    }
    let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); f.columns()];
    for (i, r) in f.rows.iter().enumerate() {
        for (j, a) in &r.coeffs {
            cols[*j].push((i, a.clone()));
        }
    }
    for (j, coeffs) in cols.into_iter().enumerate() {
        let delta = if Some(j) == f.initial { Rational::one() } else { Rational::zero() };
        lp.add_row(coeffs, Relation::Le, delta);
    }
    let yb: Vec<(usize, Rational)> =
        f.rows.iter().enumerate().filter(|(_, r)| !r.b.is_zero()).map(|(i, r)| (i, r.b.clone())).collect();
    let offset = if f.initial_is_goal { Rational::one() } else { Rational::zero() };
    lp.add_row(yb, Relation::Ge, lambda - &offset);
    lp
}

/// Largest certified threshold using only states in `allowed`: the LP
/// `max z(s0)` (min) or `max yb` (max) with entries outside `allowed` fixed to 0.
pub fn support_restricted_value(f: &FarkasSystem, allowed: &BTreeSet<usize>, dir: Direction) -> Rational {
    let zero = Rational::zero();
    match dir {
        Direction::Min => {
            let Some(c0) = f.initial else {
                return if f.initial_is_goal { Rational::one() } else { zero };
            };
            let mut lp = min_polytope(f, &zero);
            for (j, s) in f.states.iter().enumerate() {
                if !allowed.contains(s) {
                    lp.vars[j].upper = Some(Rational::zero());
                }
            }
            lp.set_objective(Sense::Maximize, vec![(c0, Rational::one())]);
            let sol = solve_lp(&lp);
            sol.objective.unwrap_or(zero)
        }
        Direction::Max => {
            if f.initial.is_none() {
                return if f.initial_is_goal { Rational::one() } else { zero };
            }
            let mut lp = max_polytope(f, &zero);
            for (i, r) in f.rows.iter().enumerate() {
                if !allowed.contains(&f.states[r.state]) {
                    lp.vars[i].upper = Some(Rational::zero());
                }
            }
            let yb: Vec<_> = f.rows.iter().enumerate().map(|(i, r)| (i, r.b.clone())).collect();
            lp.set_objective(Sense::Maximize, yb);
            let sol = solve_lp(&lp);
            debug_assert_eq!(sol.status, Status::Optimal);
            sol.objective.unwrap_or(zero)
        }
    }
}

fn canonical(d: Result<Dbm, crate::dbm::DbmError>) -> Dbm {
    d.expect("DBMs over the same clocks").canonicalize()
}

/// The subsystem `T_R^w` (weak) or `T_R^s` (strong) induced by the region set `R`.
///
/// Goal and fail keep their invariants and self-loops; a branch into goal is
/// kept when its reset valuation satisfies the goal invariant. Regions in
/// `R` that are goal or fail are ignored.
pub fn induce_subsystem(
    t: &Pta,
    m: &QuotientMdp,
    r: &[usize],
    kind: Strength,
) -> Result<Witness, FarkasError> {
    let set: BTreeSet<usize> = r.iter().copied().filter(|s| !m.is_target(*s)).collect();
    if set.is_empty() && !m.is_target(m.initial) {
        return Err(FarkasError::EmptySupport);
    }
    if !m.is_target(m.initial) && !set.contains(&m.initial) {
        return Err(FarkasError::InitialRegionMissing);
    }
    let n = t.clock_count();
    let k = m.k;
    let mut by_loc: BTreeMap<usize, Vec<&ClockRegion>> = BTreeMap::new();
    let mut keyset: BTreeSet<(usize, &ClockRegion)> = BTreeSet::new();
    for &s in &set {
        let reg = m.region(s).expect("region state");
        by_loc.entry(reg.location).or_default().push(&reg.clocks);
        keyset.insert((reg.location, &reg.clocks));
    }
    let in_r = |l: usize, v: &crate::dbm::Valuation| -> bool {
        if l == t.goal {
            return t.locations[l].invariant.satisfied_by(v);
        }
        if l == t.fail || !t.locations[l].invariant.satisfied_by(v) {
            return false;
        }
        let reg = ClockRegion::of(v, k);
        keyset.contains(&(l, &reg))
    };

    let kept: Vec<usize> = (0..t.locations.len())
        .filter(|&l| by_loc.contains_key(&l) || t.is_absorbing(l))
        .collect();
    let new_index = |l: usize| kept.iter().position(|&x| x == l);

    let mut locations = Vec::with_capacity(kept.len());
    for &l in &kept {
        let orig = &t.locations[l];
        if t.is_absorbing(l) {
            let mut loc = orig.clone();
            let me = new_index(l).unwrap();
            for tr in &mut loc.transitions {
                for b in &mut tr.branches {
                    b.target = me;
                }
            }
            locations.push(loc);
            continue;
        }
        let regs = &by_loc[&l];
        let mut weak = Dbm::empty(n);
        for z in regs {
            weak = weak.zone_closure(z.zone()).expect("canonical region zones");
        }
        let inv_dbm = match kind {
            Strength::Weak => weak.clone(),
            Strength::Strong => canonical(
                weak.time_closure().and_then(|u| u.intersect(orig.invariant.dbm())),
            ),
        };
        let mut transitions = Vec::with_capacity(orig.transitions.len());
        let fail_idx = new_index(t.fail).unwrap();
        for tr in &orig.transitions {
            let guard_dbm = match kind {
                Strength::Weak => {
                    let mut cover = Dbm::empty(n);
                    for z in regs {
                        if tr.guard.satisfied_by(&z.representative()) {
                            cover = cover.zone_closure(z.zone()).expect("canonical region zones");
                        }
                    }
                    if cover.is_empty() {
                        Dbm::empty(n)
                    } else {
                        canonical(tr.guard.dbm().intersect(&cover))
                    }
                }
                Strength::Strong => canonical(tr.guard.dbm().intersect(&inv_dbm)),
            };
            let mut branches = Vec::new();
            let mut mass = Rational::zero();
            for b in &tr.branches {
                if b.target == t.fail {
                    continue;
                }
                let keep = regs.iter().any(|z| in_r(b.target, &z.representative().reset(&b.resets)));
                if keep {
                    if let Some(ti) = new_index(b.target) {
                        mass += &b.prob;
                        branches.push(Branch { prob: b.prob.clone(), resets: b.resets.clone(), target: ti });
                    }
                }
            }
            let rest = Rational::one() - mass;
            if rest.is_positive() {
                branches.push(Branch { prob: rest, resets: Vec::new(), target: fail_idx });
            }
            transitions.push(Transition {
                guard: ClockConstraint::from_dbm(&guard_dbm),
                action: tr.action.clone(),
                branches,
            });
        }
        locations.push(Location {
            name: orig.name.clone(),
            invariant: ClockConstraint::from_dbm(&inv_dbm),
            transitions,
        });
    }
    let sub = Pta {
        clocks: t.clocks.clone(),
        bound: t.bound,
        locations,
        initial: new_index(t.initial).expect("initial location kept"),
        goal: new_index(t.goal).unwrap(),
        fail: new_index(t.fail).unwrap(),
    };
    let direction = match kind {
        Strength::Weak => Direction::Max,
        Strength::Strong => Direction::Min,
    };
    Ok(Witness {
        subsystem: sub,
        strength: kind,
        support: set.into_iter().collect(),
        verified_threshold: Rational::zero(),
        direction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::is_subsystem;
    use crate::parser::parse;
    use crate::quotient::build_quotient;

    #[test]
    fn one_state_to_goal() {
        let t = parse("clocks x; loc a inv \"x<=0\" init; loc g goal; loc f fail; trans a act u { 1 -> g; };").unwrap();
        let m = build_quotient(&t, 1).unwrap();
        let f = build_system(&m).unwrap();
        assert_eq!(f.rows.len(), 1);
        assert_eq!(f.rows[0].coeffs, vec![(0, Rational::one())]);
        assert_eq!(f.rows[0].b, Rational::one());
    }

    #[test]
    fn one_state_split() {
        let t = parse("clocks x; loc a inv \"x<=0\" init; loc g goal; loc f fail; trans a act u { 1/2 -> g; 1/2 -> f; };")
            .unwrap();
        let m = build_quotient(&t, 1).unwrap();
        let f = build_system(&m).unwrap();
        assert_eq!(f.rows[0].b, Rational::new(1, 2));
        let c = Certificate { direction: Direction::Min, vector: vec![Rational::new(1, 2)], lambda: Rational::new(1, 2) };
        assert!(is_certificate(&f, &c).unwrap());
        let c0 = Certificate { direction: Direction::Min, vector: vec![Rational::zero()], lambda: Rational::new(1, 4) };
        assert!(!is_certificate(&f, &c0).unwrap());
        let y = Certificate { direction: Direction::Max, vector: vec![Rational::one()], lambda: Rational::new(1, 2) };
        assert!(is_certificate(&f, &y).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let t = parse("clocks x; loc a inv \"x<=0\" init; loc g goal; loc f fail; trans a act u { 1 -> g; };").unwrap();
        let f = build_system(&build_quotient(&t, 1).unwrap()).unwrap();
        let c = Certificate { direction: Direction::Min, vector: vec![], lambda: Rational::zero() };
        assert!(is_certificate(&f, &c).is_err());
    }

    #[test]
    fn initial_only_weak() {
        let t = parse(
            "clocks x; loc a inv \"x<=1\" init; loc b inv \"x<=1\"; loc g goal; loc f fail;
             trans a act u { 1 -> b; }; trans b act v { 1 -> g; };",
        )
        .unwrap();
        let m = build_quotient(&t, 1).unwrap();
        let w = induce_subsystem(&t, &m, &[m.initial], Strength::Weak).unwrap();
        assert!(is_subsystem(&t, &w.subsystem).is_ok());
        assert_eq!(crate::reach::pta_probability(&w.subsystem, 1, Direction::Max).unwrap(), Rational::zero());
        assert!(matches!(induce_subsystem(&t, &m, &[], Strength::Weak), Err(FarkasError::EmptySupport)));
    }
}
