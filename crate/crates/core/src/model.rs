//! Pointed PTAs, clock constraints and structural subsystem checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dbm::{Dbm, Valuation};
use crate::numeric::{Bound, BoundValue, Rational};

/// Comparison operator of an atomic clock constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Eq => "=",
        }
    }
}

/// `c_left − c_right ∼ constant`, where `right == 0` means a plain clock bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub left: usize,
    pub right: usize,
    pub rel: Rel,
    pub constant: i64,
}

impl Atom {
    pub fn new(left: usize, right: usize, rel: Rel, constant: i64) -> Atom {
        assert!(left != 0 && left != right, "atom needs a proper left clock");
        Atom { left, right, rel, constant }
    }

    /// DBM entries `(i, j, bound)` expressing the atom.
    pub fn entries(&self) -> Vec<(usize, usize, Bound)> {
        let (l, r, c) = (self.left, self.right, self.constant);
        match self.rel {
            Rel::Le => vec![(l, r, Bound::le(c))],
            Rel::Lt => vec![(l, r, Bound::lt(c))],
            Rel::Ge => vec![(r, l, Bound::le(-c))],
            Rel::Gt => vec![(r, l, Bound::lt(-c))],
            Rel::Eq => vec![(l, r, Bound::le(c)), (r, l, Bound::le(-c))],
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut s = names[self.left - 1].clone();
        if self.right != 0 {
            s.push('-');
            s.push_str(&names[self.right - 1]);
        }
        s.push_str(self.rel.symbol());
        s.push_str(&self.constant.to_string());
        s
    }
}

fn is_trivial_entry(i: usize, j: usize, b: Bound) -> bool {
    i == j || b.is_pos_inf() || (i == 0 && b == Bound::LE_ZERO)
}

/// A small conjunction of atoms describing a canonical non-empty DBM.
///
/// Redundant entries are removed greedily (diagonals are tried first), and
/// matching upper/lower pairs are merged into equalities.
pub fn atoms_from_dbm(m: &Dbm) -> Vec<Atom> {
    let m = m.canonicalize();
    if m.is_empty() {
        return Vec::new();
    }
    let n = m.clocks();
    let dim = m.dim();
    let mut edges: Vec<(usize, usize, Bound)> = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let b = m.get(i, j);
            if !is_trivial_entry(i, j, b) {
                edges.push((i, j, b));
            }
        }
    }
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..edges.len()).collect();
        idx.sort_by_key(|&e| (edges[e].0 == 0 || edges[e].1 == 0, e));
        idx
    };
    let mut keep = vec![true; edges.len()];
    for e in order {
        keep[e] = false;
        let rest: Vec<_> = edges.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect();
        if Dbm::from_constraints(n, &rest).canonicalize() != m {
            keep[e] = true;
        }
    }
    let kept: Vec<(usize, usize, Bound)> =
        edges.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect();
    let lookup = |i: usize, j: usize| kept.iter().find(|e| e.0 == i && e.1 == j).map(|e| e.2);

    let mut atoms = Vec::new();
    let mut done = BTreeSet::new();
    for &(i, j, b) in &kept {
        if done.contains(&(i, j)) {
            continue;
        }
        done.insert((i, j));
        let a = match b.value() {
            BoundValue::Fin(a) => a,
            _ => unreachable!("non-trivial entries of a non-empty canonical DBM are finite"),
        };
        let strict = b.is_strict();
        // Orient atoms so that the left clock is non-zero and upper bounds read naturally.
        if i == 0 {
            let rel = if strict { Rel::Gt } else { Rel::Ge };
            if !strict && lookup(j, 0) == Some(Bound::le(-a)) {
                done.insert((j, 0));
                atoms.push(Atom::new(j, 0, Rel::Eq, -a));
            } else {
                atoms.push(Atom::new(j, 0, rel, -a));
            }
        } else {
            if !strict && lookup(j, i) == Some(Bound::le(-a)) {
                done.insert((j, i));
                atoms.push(Atom::new(i, j, Rel::Eq, a));
                continue;
            }
            let rel = if strict { Rel::Lt } else { Rel::Le };
            atoms.push(Atom::new(i, j, rel, a));
        }
    }
    atoms.sort_by_key(|a| (a.right != 0, a.left, a.right, a.rel));
    atoms
}

/// A conjunction of atoms (or `false`) together with its canonical DBM.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClockConstraint {
    atoms: Option<Vec<Atom>>,
    dbm: Dbm,
}

impl ClockConstraint {
    pub fn always(clocks: usize) -> ClockConstraint {
        ClockConstraint { atoms: Some(Vec::new()), dbm: Dbm::universe(clocks) }
    }

    pub fn never(clocks: usize) -> ClockConstraint {
        ClockConstraint { atoms: None, dbm: Dbm::empty(clocks) }
    }

    pub fn from_atoms(clocks: usize, atoms: Vec<Atom>) -> ClockConstraint {
        let entries: Vec<_> = atoms.iter().flat_map(|a| a.entries()).collect();
        let dbm = Dbm::from_constraints(clocks, &entries).canonicalize();
        ClockConstraint { atoms: Some(atoms), dbm }
    }

    pub fn from_dbm(m: &Dbm) -> ClockConstraint {
        let c = m.canonicalize();
        if c.is_empty() {
            return ClockConstraint::never(m.clocks());
        }
        ClockConstraint { atoms: Some(atoms_from_dbm(&c)), dbm: c }
    }

    /// `None` for the literal `false`.
    pub fn atoms(&self) -> Option<&[Atom]> {
        self.atoms.as_deref()
    }

    /// The canonical DBM (or the empty marker).
    pub fn dbm(&self) -> &Dbm {
        &self.dbm
    }

    pub fn clocks(&self) -> usize {
        self.dbm.clocks()
    }

    pub fn is_unsatisfiable(&self) -> bool {
        self.dbm.is_empty()
    }

    pub fn satisfied_by(&self, v: &Valuation) -> bool {
        self.dbm.satisfies(v)
    }

    /// Largest absolute constant among the atoms.
    pub fn max_constant(&self) -> i64 {
        self.atoms.iter().flatten().map(|a| a.constant.abs()).max().unwrap_or(0)
    }

    pub fn render(&self, names: &[String]) -> String {
        match &self.atoms {
            None => "false".to_string(),
            Some(a) if a.is_empty() => "true".to_string(),
            Some(a) => a.iter().map(|x| x.render(names)).collect::<Vec<_>>().join(" & "),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub prob: Rational,
    /// Reset clock indices (1-based), sorted and deduplicated.
    pub resets: Vec<usize>,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub guard: ClockConstraint,
    pub action: String,
    pub branches: Vec<Branch>,
}

impl Transition {
    /// Probability mass per `(reset set, target)`.
    pub fn distribution(&self) -> BTreeMap<(Vec<usize>, usize), Rational> {
        let mut m: BTreeMap<(Vec<usize>, usize), Rational> = BTreeMap::new();
        for b in &self.branches {
            *m.entry((b.resets.clone(), b.target)).or_default() += &b.prob;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub name: String,
    pub invariant: ClockConstraint,
    pub transitions: Vec<Transition>,
}

/// Action label of the normalized self-loop on goal and fail.
pub const ABSORBING_ACTION: &str = "loop";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("no goal location declared")]
    MissingGoal,
    #[error("no fail location declared")]
    MissingFail,
    #[error("no initial location declared")]
    MissingInit,
    #[error("location flag `{0}` declared more than once")]
    DuplicateFlag(&'static str),
    #[error("goal and fail must be distinct locations")]
    GoalIsFail,
    #[error("location `{0}` declared twice")]
    DuplicateLocation(String),
    #[error("clock `{0}` declared twice")]
    DuplicateClock(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
    #[error("distribution of `{action}` at `{location}` sums to {sum}, not 1")]
    DistributionSum { location: String, action: String, sum: Rational },
    #[error("non-positive probability {prob} in `{action}` at `{location}`")]
    NonPositiveProbability { location: String, action: String, prob: Rational },
    #[error("the zero valuation violates the invariant of the initial location")]
    InitialInvariantViolated,
    #[error("location `{0}` has no outgoing transitions")]
    NoTransitions(String),
    #[error("`{0}` must be absorbing")]
    NotAbsorbing(String),
    #[error("constant {constant} exceeds declared bound {bound}")]
    ConstantExceedsBound { constant: i64, bound: i64 },
    #[error("constraint mentions a clock twice")]
    BadAtom,
}

/// A pointed PTA `(Loc, C, Act, inv, T, l0)` with goal and fail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pta {
    pub clocks: Vec<String>,
    /// Declared clamp constant `K`, if any.
    pub bound: Option<i64>,
    pub locations: Vec<Location>,
    pub initial: usize,
    pub goal: usize,
    pub fail: usize,
}

impl Pta {
    pub fn clock_count(&self) -> usize {
        self.clocks.len()
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn is_absorbing(&self, l: usize) -> bool {
        l == self.goal || l == self.fail
    }

    pub fn actions(&self) -> BTreeSet<String> {
        self.locations
            .iter()
            .flat_map(|l| l.transitions.iter().map(|t| t.action.clone()))
            .collect()
    }

    /// Largest absolute constant in any invariant or guard.
    pub fn max_constant(&self) -> i64 {
        self.locations
            .iter()
            .flat_map(|l| {
                std::iter::once(l.invariant.max_constant())
                    .chain(l.transitions.iter().map(|t| t.guard.max_constant()))
            })
            .max()
            .unwrap_or(0)
    }

    /// The clamp constant: the declared bound, else the largest constant.
    pub fn clamp(&self) -> i64 {
        self.bound.unwrap_or_else(|| self.max_constant())
    }

    /// Every non-absorbing invariant is bounded.
    pub fn has_bounded_invariants(&self) -> bool {
        self.locations
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.is_absorbing(*i))
            .all(|(_, l)| l.invariant.dbm().is_bounded())
    }

    /// Replaces goal/fail transitions with a single trivially guarded self-loop.
    pub fn normalize_absorbing(&mut self) {
        let n = self.clock_count();
        for l in [self.goal, self.fail] {
            self.locations[l].transitions = vec![Transition {
                guard: ClockConstraint::always(n),
                action: ABSORBING_ACTION.to_string(),
                branches: vec![Branch { prob: Rational::one(), resets: Vec::new(), target: l }],
            }];
        }
    }

    /// Checks the structural invariants of a pointed PTA.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.goal == self.fail {
            return Err(ValidationError::GoalIsFail);
        }
        let mut seen = BTreeSet::new();
        for l in &self.locations {
            if !seen.insert(&l.name) {
                return Err(ValidationError::DuplicateLocation(l.name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for c in &self.clocks {
            if !seen.insert(c) {
                return Err(ValidationError::DuplicateClock(c.clone()));
            }
        }
        if let Some(k) = self.bound {
            let c = self.max_constant();
            if c > k {
                return Err(ValidationError::ConstantExceedsBound { constant: c, bound: k });
            }
        }
        for (li, l) in self.locations.iter().enumerate() {
            if l.transitions.is_empty() {
                return Err(ValidationError::NoTransitions(l.name.clone()));
            }
            for t in &l.transitions {
                if self.is_absorbing(li) && t.branches.iter().any(|b| b.target != li) {
                    return Err(ValidationError::NotAbsorbing(l.name.clone()));
                }
                let mut sum = Rational::zero();
                for b in &t.branches {
                    if !b.prob.is_positive() {
                        return Err(ValidationError::NonPositiveProbability {
                            location: l.name.clone(),
                            action: t.action.clone(),
                            prob: b.prob.clone(),
                        });
                    }
                    if b.target >= self.locations.len() {
                        return Err(ValidationError::UnknownLocation(format!("#{}", b.target)));
                    }
                    sum += &b.prob;
                }
                if !sum.is_one() {
                    return Err(ValidationError::DistributionSum {
                        location: l.name.clone(),
                        action: t.action.clone(),
                        sum,
                    });
                }
            }
        }
        let n = self.clock_count();
        if !self.locations[self.initial].invariant.satisfied_by(&Valuation::zero(n)) {
            return Err(ValidationError::InitialInvariantViolated);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Min => "min",
            Direction::Max => "max",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Weak,
    Strong,
}

impl Strength {
    /// Witnesses for lower bounds on `Pr^min` must be strong.
    pub fn for_direction(dir: Direction) -> Strength {
        match dir {
            Direction::Min => Strength::Strong,
            Direction::Max => Strength::Weak,
        }
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strength::Weak => "weak",
            Strength::Strong => "strong",
        })
    }
}

/// A subsystem together with the region set it was induced from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub subsystem: Pta,
    pub strength: Strength,
    /// Quotient state ids of the supporting region set.
    pub support: Vec<usize>,
    pub verified_threshold: Rational,
    pub direction: Direction,
}

/// Outcome of a subsystem check; `Err` carries the first violated condition.
pub type SubsystemCheck = Result<(), SubsystemViolation>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubsystemViolation {
    #[error("clock sets differ")]
    ClockMismatch,
    #[error("goal or fail missing from the subsystem")]
    MissingGoalOrFail,
    #[error("initial location differs")]
    InitialMismatch,
    #[error("location `{0}` does not exist in the original PTA")]
    UnknownLocation(String),
    #[error("invariant of {0} not included in the original invariant")]
    InvariantNotIncluded(String),
    #[error("guard of {action} at {location} not included")]
    GuardNotIncluded { location: String, action: String },
    #[error("transition {action} at {location} has no matching original transition")]
    NoMatchingTransition { location: String, action: String },
    #[error("no injective transition map at {0}")]
    NoInjection(String),
    #[error("guard of {action} at {location} shrunk more than allowed")]
    GuardShrunk { location: String, action: String },
    #[error("transition {action} at {location} was deleted")]
    TransitionDeleted { location: String, action: String },
    #[error("invariant of {0} not closed under time successors (condition 4)")]
    NotTimeClosed(String),
}

/// Maps subsystem location indices to original indices by name.
fn location_map(t: &Pta, sub: &Pta) -> Result<Vec<usize>, SubsystemViolation> {
    if t.clocks != sub.clocks {
        return Err(SubsystemViolation::ClockMismatch);
    }
    let mut map = Vec::with_capacity(sub.locations.len());
    for l in &sub.locations {
        match t.location_index(&l.name) {
            Some(i) => map.push(i),
            None => return Err(SubsystemViolation::UnknownLocation(l.name.clone())),
        }
    }
    if map[sub.goal] != t.goal || map[sub.fail] != t.fail {
        return Err(SubsystemViolation::MissingGoalOrFail);
    }
    if map[sub.initial] != t.initial {
        return Err(SubsystemViolation::InitialMismatch);
    }
    Ok(map)
}

/// (3b) and (3c): equal action and every non-fail entry kept or dropped.
fn distribution_compatible(
    t: &Pta,
    orig: &Transition,
    sub: &Pta,
    st: &Transition,
    map: &[usize],
) -> bool {
    if orig.action != st.action {
        return false;
    }
    let od = orig.distribution();
    for ((resets, target), p) in st.distribution() {
        let tt = map[target];
        if tt == t.fail {
            continue;
        }
        if od.get(&(resets, tt)) != Some(&p) {
            return false;
        }
    }
    // A sub-location l' != fail with mass 0 in μ' is allowed; nothing more to check.
    let _ = sub;
    true
}

fn weak_compatible(t: &Pta, orig: &Transition, sub: &Pta, st: &Transition, map: &[usize]) -> bool {
    distribution_compatible(t, orig, sub, st, map)
        && orig.guard.dbm().includes(st.guard.dbm()).expect("same clocks")
}

fn strong_compatible(
    t: &Pta,
    orig: &Transition,
    sub: &Pta,
    st: &Transition,
    map: &[usize],
    inv_sub: &Dbm,
) -> bool {
    if !distribution_compatible(t, orig, sub, st, map) {
        return false;
    }
    let expect = orig.guard.dbm().intersect(inv_sub).expect("same clocks");
    let got = st.guard.dbm().intersect(inv_sub).expect("same clocks");
    got.equivalent(&expect).expect("same clocks")
}

/// Maximum bipartite matching (augmenting paths); returns the matched count.
fn max_matching(left: usize, right: usize, adj: &dyn Fn(usize, usize) -> bool) -> usize {
    fn augment(
        u: usize,
        right: usize,
        adj: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for v in 0..right {
            if seen[v] || !adj(u, v) {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none() || augment(owner[v].unwrap(), right, adj, seen, owner) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    let mut count = 0;
    for u in 0..left {
        let mut seen = vec![false; right];
        if augment(u, right, adj, &mut seen, &mut owner) {
            count += 1;
        }
    }
    count
}

/// Definition of a (weak) subsystem: location containment, invariant
/// inclusion and an injective transition map.
pub fn is_subsystem(t: &Pta, sub: &Pta) -> SubsystemCheck {
    let map = location_map(t, sub)?;
    for (si, sl) in sub.locations.iter().enumerate() {
        let ol = &t.locations[map[si]];
        if !ol.invariant.dbm().includes(sl.invariant.dbm()).expect("same clocks") {
            return Err(SubsystemViolation::InvariantNotIncluded(sl.name.clone()));
        }
        if sub.is_absorbing(si) {
            continue;
        }
        let adj = |u: usize, v: usize| {
            weak_compatible(t, &ol.transitions[v], sub, &sl.transitions[u], &map)
        };
        if max_matching(sl.transitions.len(), ol.transitions.len(), &adj) < sl.transitions.len() {
            for st in &sl.transitions {
                let dist_ok: Vec<&Transition> = ol
                    .transitions
                    .iter()
                    .filter(|ot| distribution_compatible(t, ot, sub, st, &map))
                    .collect();
                if dist_ok.is_empty() {
                    return Err(SubsystemViolation::NoMatchingTransition {
                        location: sl.name.clone(),
                        action: st.action.clone(),
                    });
                }
                if !dist_ok
                    .iter()
                    .any(|ot| ot.guard.dbm().includes(st.guard.dbm()).expect("same clocks"))
                {
                    return Err(SubsystemViolation::GuardNotIncluded {
                        location: sl.name.clone(),
                        action: st.action.clone(),
                    });
                }
            }
            return Err(SubsystemViolation::NoInjection(sl.name.clone()));
        }
    }
    Ok(())
}

/// Strong subsystem: additionally a left-inverse with `g′ ≡ g ∧ inv′(l)` and
/// time-successor closure of every invariant within the original one.
pub fn is_strong_subsystem(t: &Pta, sub: &Pta) -> SubsystemCheck {
    is_subsystem(t, sub)?;
    let map = location_map(t, sub)?;
    for (si, sl) in sub.locations.iter().enumerate() {
        let ol = &t.locations[map[si]];
        let inv_sub = sl.invariant.dbm();
        if !sub.is_absorbing(si) {
            let adj = |u: usize, v: usize| {
                strong_compatible(t, &ol.transitions[v], sub, &sl.transitions[u], &map, inv_sub)
            };
            for (v, ot) in ol.transitions.iter().enumerate() {
                if !(0..sl.transitions.len()).any(|u| adj(u, v)) {
                    let partner = sl
                        .transitions
                        .iter()
                        .any(|st| distribution_compatible(t, ot, sub, st, &map));
                    return Err(if partner {
                        SubsystemViolation::GuardShrunk {
                            location: sl.name.clone(),
                            action: ot.action.clone(),
                        }
                    } else {
                        SubsystemViolation::TransitionDeleted {
                            location: sl.name.clone(),
                            action: ot.action.clone(),
                        }
                    });
                }
            }
            if max_matching(sl.transitions.len(), ol.transitions.len(), &adj)
                < sl.transitions.len()
            {
                return Err(SubsystemViolation::NoInjection(sl.name.clone()));
            }
        }
        if !inv_sub.is_empty() {
            let succ = inv_sub
                .time_closure()
                .and_then(|u| u.intersect(ol.invariant.dbm()))
                .expect("same clocks")
                .canonicalize();
            if !inv_sub.includes(&succ).expect("same clocks") {
                return Err(SubsystemViolation::NotTimeClosed(sl.name.clone()));
            }
        }
    }
    Ok(())
}

/// `vol(T)`: sum of invariant volumes over non-absorbing locations, `None` if
/// some invariant has infinite volume. Unbounded lower-dimensional invariants
/// count as 0.
pub fn pta_volume(t: &Pta) -> Option<Rational> {
    let mut total = Rational::zero();
    for (i, l) in t.locations.iter().enumerate() {
        if t.is_absorbing(i) {
            continue;
        }
        let m = l.invariant.dbm();
        if !m.is_full_dimensional() {
            continue;
        }
        let k = m.max_upper()?;
        total += crate::volume::dbm_volume(m, k.max(1)).ok()?.value;
    }
    Some(total)
}

fn location_names(t: &Pta) -> BTreeSet<&str> {
    t.locations
        .iter()
        .enumerate()
        .filter(|(i, _)| !t.is_absorbing(*i))
        .map(|(_, l)| l.name.as_str())
        .collect()
}

/// Number of locations excluding goal and fail.
pub fn location_count(t: &Pta) -> usize {
    location_names(t).len()
}

/// `a ≤loc b`.
pub fn loc_le(a: &Pta, b: &Pta) -> bool {
    location_count(a) <= location_count(b)
}

/// `a ≤inv b`: the locations of `a` are among those of `b`, each with an
/// invariant included in the one of `b`.
pub fn inv_le(a: &Pta, b: &Pta) -> bool {
    a.locations.iter().enumerate().all(|(i, l)| {
        if a.is_absorbing(i) {
            return true;
        }
        match b.location_index(&l.name) {
            Some(j) => b.locations[j].invariant.dbm().includes(l.invariant.dbm()).unwrap_or(false),
            None => false,
        }
    })
}

/// `a ≤vol b`, with unbounded volumes compared as `+∞`.
pub fn vol_le(a: &Pta, b: &Pta) -> bool {
    match (pta_volume(a), pta_volume(b)) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    }
}
