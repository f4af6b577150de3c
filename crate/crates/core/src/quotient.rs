//! The finite quotient MDP of a PTA under region equivalence.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dbm::{Dbm, Valuation};
use crate::model::Pta;
use crate::numeric::Rational;
use crate::region::ClockRegion;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotientError {
    #[error("constant {constant} exceeds the clamp bound {bound}")]
    UnboundedConstant { constant: i64, bound: i64 },
    #[error("the zero valuation violates the initial invariant")]
    InitialInvariantViolated,
    #[error("valuation violates the invariant of the location")]
    InvariantViolated,
}

/// A location together with a clock region.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Region {
    pub location: usize,
    pub clocks: ClockRegion,
}

impl Region {
    pub fn representative(&self) -> Valuation {
        self.clocks.representative()
    }

    pub fn zone(&self) -> &Dbm {
        self.clocks.zone()
    }
}

/// The region of `(l, v)`; `v` must satisfy `inv(l)`.
pub fn region_of(t: &Pta, l: usize, v: &Valuation, k: i64) -> Result<Region, QuotientError> {
    if !t.locations[l].invariant.satisfied_by(v) {
        return Err(QuotientError::InvariantViolated);
    }
    Ok(Region { location: l, clocks: ClockRegion::of(v, k) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum State {
    Goal,
    Fail,
    Region(Region),
}

/// Label of delay choices.
pub const TAU: &str = "tau";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub action: String,
    pub is_tau: bool,
    /// PTA transition index within the source location (`None` for τ and loops).
    pub transition: Option<usize>,
    /// Successor distribution, sorted by state id.
    pub dist: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientMdp {
    pub states: Vec<State>,
    pub choices: Vec<Vec<Choice>>,
    pub initial: usize,
    pub goal: usize,
    pub fail: usize,
    pub k: i64,
    pub clock_names: Vec<String>,
    pub location_names: Vec<String>,
}

impl QuotientMdp {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_target(&self, s: usize) -> bool {
        s == self.goal || s == self.fail
    }

    /// Ids of region states, i.e. `S` without goal and fail.
    pub fn region_states(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&s| !self.is_target(s)).collect()
    }

    pub fn region(&self, s: usize) -> Option<&Region> {
        match &self.states[s] {
            State::Region(r) => Some(r),
            _ => None,
        }
    }

    pub fn state_label(&self, s: usize) -> String {
        match &self.states[s] {
            State::Goal => "goal".to_string(),
            State::Fail => "fail".to_string(),
            State::Region(r) => format!(
                "{} | {}",
                self.location_names[r.location],
                r.zone().label(&self.clock_names)
            ),
        }
    }

    /// Graphviz rendering; τ-edges are dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph quotient {\n  rankdir=LR;\n");
        for s in 0..self.states.len() {
            let shape = if self.is_target(s) { "doublecircle" } else { "box" };
            let style = if s == self.initial { ", penwidth=2" } else { "" };
            let _ = writeln!(
                out,
                "  s{s} [label=\"{}\", shape={shape}{style}];",
                self.state_label(s).replace('"', "\\\"")
            );
        }
        for (s, cs) in self.choices.iter().enumerate() {
            for (ci, c) in cs.iter().enumerate() {
                if c.is_tau {
                    let (t, _) = &c.dist[0];
                    let _ = writeln!(out, "  s{s} -> s{t} [label=\"tau\", style=dashed];");
                    continue;
                }
                if c.dist.len() == 1 {
                    let (t, _) = &c.dist[0];
                    let _ = writeln!(out, "  s{s} -> s{t} [label=\"{}\"];", c.action);
                    continue;
                }
                let hub = format!("c{s}_{ci}");
                let _ = writeln!(out, "  {hub} [shape=point];");
                let _ = writeln!(out, "  s{s} -> {hub} [label=\"{}\", arrowhead=none];", c.action);
                for (t, p) in &c.dist {
                    let _ = writeln!(out, "  {hub} -> s{t} [label=\"{p}\"];");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Forward exploration of the region quotient from `(l0, 0)`.
///
/// Delays add a τ-choice to every later region on the time-successor chain
/// while the invariant holds. τ self-loops are omitted except on
/// time-unbounded regions, where time can diverge without leaving the
/// region. Each enabled PTA transition yields one choice; mass whose reset
/// valuation violates the target invariant goes to fail.
pub fn build_quotient(t: &Pta, k: i64) -> Result<QuotientMdp, QuotientError> {
    let c = t.max_constant();
    if c > k {
        return Err(QuotientError::UnboundedConstant { constant: c, bound: k });
    }
    let n = t.clock_count();
    let zero = Valuation::zero(n);
    if !t.locations[t.initial].invariant.satisfied_by(&zero) {
        return Err(QuotientError::InitialInvariantViolated);
    }
    let loop_choice = |s: usize| Choice {
        action: crate::model::ABSORBING_ACTION.to_string(),
        is_tau: false,
        transition: None,
        dist: vec![(s, Rational::one())],
    };
    let mut states = vec![State::Goal, State::Fail];
    let mut choices = vec![vec![loop_choice(0)], vec![loop_choice(1)]];
    let mut index: HashMap<Region, usize> = HashMap::new();
    let mut queue = VecDeque::new();

    let mut intern = |r: Region, states: &mut Vec<State>, choices: &mut Vec<Vec<Choice>>, queue: &mut VecDeque<usize>| -> usize {
        if r.location == t.goal {
            return 0;
        }
        if r.location == t.fail {
            return 1;
        }
        if let Some(&id) = index.get(&r) {
            return id;
        }
        let id = states.len();
        index.insert(r.clone(), id);
        states.push(State::Region(r));
        choices.push(Vec::new());
        queue.push_back(id);
        id
    };

    let initial = intern(
        Region { location: t.initial, clocks: ClockRegion::of(&zero, k) },
        &mut states,
        &mut choices,
        &mut queue,
    );

    while let Some(s) = queue.pop_front() {
        let State::Region(r) = states[s].clone() else { continue };
        let loc = &t.locations[r.location];
        let inv = loc.invariant.dbm();
        let mut out = Vec::new();

        let mut cur = r.clocks.clone();
        while let Some(next) = cur.time_successor() {
            if !next.satisfies(inv) {
                break;
            }
            let id = intern(Region { location: r.location, clocks: next.clone() }, &mut states, &mut choices, &mut queue);
            out.push(Choice { action: TAU.to_string(), is_tau: true, transition: None, dist: vec![(id, Rational::one())] });
            cur = next;
        }
        if r.clocks.is_time_unbounded() {
            out.push(Choice { action: TAU.to_string(), is_tau: true, transition: None, dist: vec![(s, Rational::one())] });
        }

        let v = r.representative();
        for (ti, tr) in loc.transitions.iter().enumerate() {
            if !tr.guard.satisfied_by(&v) {
                continue;
            }
            let mut dist: BTreeMap<usize, Rational> = BTreeMap::new();
            for b in &tr.branches {
                let v2 = v.reset(&b.resets);
                let target = if b.target == t.fail || !t.locations[b.target].invariant.satisfied_by(&v2) {
                    1
                } else {
                    intern(
                        Region { location: b.target, clocks: ClockRegion::of(&v2, k) },
                        &mut states,
                        &mut choices,
                        &mut queue,
                    )
                };
                *dist.entry(target).or_default() += &b.prob;
            }
            out.push(Choice {
                action: tr.action.clone(),
                is_tau: false,
                transition: Some(ti),
                dist: dist.into_iter().collect(),
            });
        }
        choices[s] = out;
    }

    Ok(QuotientMdp {
        states,
        choices,
        initial,
        goal: 0,
        fail: 1,
        k,
        clock_names: t.clocks.clone(),
        location_names: t.locations.iter().map(|l| l.name.clone()).collect(),
    })
}

/// States from which some scheduler avoids goal and fail forever (including
/// deadlocks). The proceed assumption holds iff the result is empty.
pub fn proceed_violations(m: &QuotientMdp) -> Vec<usize> {
    let n = m.len();
    let mut in_x: Vec<bool> = (0..n).map(|s| !m.is_target(s)).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !in_x[s] || m.choices[s].is_empty() {
                continue;
            }
            let stays = m.choices[s].iter().any(|c| c.dist.iter().all(|(t, _)| in_x[*t]));
            if !stays {
                in_x[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&s| in_x[s]).collect()
}

/// `true` iff every state reaches goal or fail with positive probability
/// under every scheduler; otherwise the offending states.
pub fn check_proceed_assumption(m: &QuotientMdp) -> (bool, Vec<usize>) {
    let bad = proceed_violations(m);
    (bad.is_empty(), bad)
}
