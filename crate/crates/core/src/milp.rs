//! Exact rational linear and mixed-binary programming.
//!
//! The LP engine is a bounded-variable primal simplex in dictionary form.
//! Every row `i` gets an activity variable `r_i = a_i·x` carrying the row's
//! bounds, so the dictionary is homogeneous and the basis starts as the row
//! variables. Infeasible bases are repaired by a phase 1 that swaps each
//! violated basic variable for an artificial; this works from any basis and is
//! what branch-and-bound uses after tightening a bound. Entering and leaving
//! variables follow Bland's rule.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::numeric::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: Sense,
    pub coeffs: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LinearProgram {
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
    pub objective: Option<Objective>,
    /// Minimization objectives for Pareto enumeration.
    pub objectives: Vec<Vec<(usize, Rational)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// The branch-and-bound node budget ran out; `values` holds the incumbent if any.
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    pub values: Vec<Rational>,
    pub objective: Option<Rational>,
    /// Row multipliers: reduced costs of the row activity variables at the
    /// final basis (phase 1 multipliers when infeasible).
    pub row_duals: Vec<Rational>,
    /// An improving direction over the structural variables when unbounded.
    pub ray: Option<Vec<Rational>>,
    /// Values of `objectives` (Pareto enumeration only).
    pub objective_values: Vec<Rational>,
}

impl Solution {
    fn status_only(status: Status) -> Solution {
        Solution {
            status,
            values: Vec::new(),
            objective: None,
            row_duals: Vec::new(),
            ray: None,
            objective_values: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

fn dot(coeffs: &[(usize, Rational)], x: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (j, c) in coeffs {
        if !c.is_zero() && !x[*j].is_zero() {
            s += c * &x[*j];
        }
    }
    s
}

impl LinearProgram {
    pub fn new() -> LinearProgram {
        LinearProgram::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: Option<Rational>,
        upper: Option<Rational>,
        kind: VarKind,
    ) -> usize {
        let (lower, upper) = match kind {
            VarKind::Binary => (Some(Rational::zero()), Some(Rational::one())),
            VarKind::Continuous => (lower, upper),
        };
        self.vars.push(Variable { name: name.into(), lower, upper, kind });
        self.vars.len() - 1
    }

    /// A continuous variable with lower bound 0.
    pub fn add_nonneg(&mut self, name: impl Into<String>) -> usize {
        self.add_var(name, Some(Rational::zero()), None, VarKind::Continuous)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.add_var(name, None, None, VarKind::Binary)
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) -> usize {
        self.rows.push(Constraint { coeffs, rel, rhs });
        self.rows.len() - 1
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<(usize, Rational)>) {
        self.objective = Some(Objective { sense, coeffs });
    }

    pub fn binaries(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&j| self.vars[j].kind == VarKind::Binary).collect()
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.as_ref().map(|o| dot(&o.coeffs, x)).unwrap_or_default()
    }

    /// Exact check of bounds, rows and integrality.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.vars.len() {
            return false;
        }
        for (v, val) in self.vars.iter().zip(x) {
            if v.lower.as_ref().is_some_and(|l| val < l) || v.upper.as_ref().is_some_and(|u| val > u) {
                return false;
            }
            if v.kind == VarKind::Binary && !(val.is_zero() || val.is_one()) {
                return false;
            }
        }
        self.rows.iter().all(|r| {
            let a = dot(&r.coeffs, x);
            match r.rel {
                Relation::Le => a <= r.rhs,
                Relation::Ge => a >= r.rhs,
                Relation::Eq => a == r.rhs,
            }
        })
    }

    /// CPLEX LP text (decimal approximations of the rationals); debug aid.
    pub fn to_lp_format(&self) -> String {
        let name = |j: usize| {
            let n: String = self.vars[j]
                .name
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
                .collect();
            format!("v{j}_{n}")
        };
        let num = |r: &Rational| r.to_decimal_string(12);
        let expr = |coeffs: &[(usize, Rational)]| {
            if coeffs.is_empty() {
                return "0 v0_dummy".to_string();
            }
            let mut s = String::new();
            for (k, (j, c)) in coeffs.iter().enumerate() {
                if k > 0 {
                    s.push_str(if c.is_negative() { " - " } else { " + " });
                } else if c.is_negative() {
                    s.push_str("- ");
                }
                let _ = write!(s, "{} {}", num(&c.abs()), name(*j));
            }
            s
        };
        let mut out = String::new();
        let (sense, coeffs) = match &self.objective {
            Some(o) => (o.sense, o.coeffs.clone()),
            None => (Sense::Minimize, Vec::new()),
        };
        out.push_str(if sense == Sense::Minimize { "Minimize\n" } else { "Maximize\n" });
        let _ = writeln!(out, " obj: {}", expr(&coeffs));
        out.push_str("Subject To\n");
        for (i, r) in self.rows.iter().enumerate() {
            let op = match r.rel {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " c{i}: {} {op} {}", expr(&r.coeffs), num(&r.rhs));
        }
        out.push_str("Bounds\n");
        for (j, v) in self.vars.iter().enumerate() {
            if v.kind == VarKind::Binary {
                continue;
            }
            match (&v.lower, &v.upper) {
                (None, None) => {
                    let _ = writeln!(out, " {} free", name(j));
                }
                (Some(l), None) => {
                    let _ = writeln!(out, " {} >= {}", name(j), num(l));
                }
                (None, Some(u)) => {
                    let _ = writeln!(out, " -inf <= {} <= {}", name(j), num(u));
                }
                (Some(l), Some(u)) => {
                    let _ = writeln!(out, " {} <= {} <= {}", num(l), name(j), num(u));
                }
            }
        }
        let bins = self.binaries();
        if !bins.is_empty() {
            out.push_str("Binaries\n");
            for j in bins {
                let _ = writeln!(out, " {}", name(j));
            }
        }
        out.push_str("End\n");
        out
    }
}

/// Outcome of a simplex run on a [`Simplex`] state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded(Vec<Rational>),
}


/// A simplex dictionary `x_B = D x_N` over structural, row and artificial variables.
#[derive(Debug, Clone)]
pub struct Simplex {
    n_struct: usize,
    n_rows: usize,
    lower: Vec<Option<Rational>>,
    upper: Vec<Option<Rational>>,
    value: Vec<Rational>,
    /// Row of the dictionary holding the variable, if basic.
    row_of: Vec<Option<usize>>,
    basis: Vec<usize>,
    d: Vec<Vec<Rational>>,
    cost: Vec<Rational>,
    reduced: Vec<Rational>,
    pivots: u64,
}

impl Simplex {
    /// Initial dictionary with all row variables basic.
    pub fn new(lp: &LinearProgram) -> Simplex {
        let n = lp.vars.len();
        let m = lp.rows.len();
        let nv = n + m;
        let mut lower = Vec::with_capacity(nv);
        let mut upper = Vec::with_capacity(nv);
        let mut value = Vec::with_capacity(nv);
        for v in &lp.vars {
            lower.push(v.lower.clone());
            upper.push(v.upper.clone());
            value.push(match (&v.lower, &v.upper) {
                (Some(l), _) => l.clone(),
                (None, Some(u)) => u.clone(),
                (None, None) => Rational::zero(),
            });
        }
        let mut d = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut row_of = vec![None; nv];
        for (i, r) in lp.rows.iter().enumerate() {
            let (lo, hi) = match r.rel {
                Relation::Le => (None, Some(r.rhs.clone())),
                Relation::Ge => (Some(r.rhs.clone()), None),
                Relation::Eq => (Some(r.rhs.clone()), Some(r.rhs.clone())),
            };
            lower.push(lo);
            upper.push(hi);
            let mut row = vec![Rational::zero(); nv];
            for (j, c) in &r.coeffs {
                row[*j] += c;
            }
            value.push(dot(&r.coeffs, &value[..n]));
            d.push(row);
            basis.push(n + i);
            row_of[n + i] = Some(i);
        }
        Simplex {
            n_struct: n,
            n_rows: m,
            lower,
            upper,
            value,
            row_of,
            basis,
            d,
            cost: vec![Rational::zero(); nv],
            reduced: vec![Rational::zero(); nv],
            pivots: 0,
        }
    }

    fn nvars(&self) -> usize {
        self.value.len()
    }

    /// `false` after a failed phase 1 left artificial columns behind.
    fn is_clean(&self) -> bool {
        self.nvars() == self.n_struct + self.n_rows
    }

    pub fn pivot_count(&self) -> u64 {
        self.pivots
    }

    pub fn structural_values(&self) -> Vec<Rational> {
        self.value[..self.n_struct].to_vec()
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!((&self.lower[j], &self.upper[j]), (Some(l), Some(u)) if l == u)
    }

    fn below(&self, j: usize) -> bool {
        self.lower[j].as_ref().is_some_and(|l| self.value[j] < *l)
    }

    fn above(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_some_and(|u| self.value[j] > *u)
    }

    /// Changes the bounds of a structural variable, moving it if nonbasic.
    pub fn set_bounds(&mut self, j: usize, lower: Option<Rational>, upper: Option<Rational>) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.row_of[j].is_none() {
            let target = if self.below(j) {
                self.lower[j].clone()
            } else if self.above(j) {
                self.upper[j].clone()
            } else {
                None
            };
            if let Some(t) = target {
                let delta = &t - &self.value[j];
                self.value[j] = t;
                for i in 0..self.d.len() {
                    let c = &self.d[i][j];
                    if !c.is_zero() {
                        let b = self.basis[i];
                        let inc = c * &delta;
                        self.value[b] += inc;
                    }
                }
            }
        }
    }

    pub fn bounds(&self, j: usize) -> (Option<Rational>, Option<Rational>) {
        (self.lower[j].clone(), self.upper[j].clone())
    }

    /// Sets minimization costs over structural variables and recomputes reduced costs.
    pub fn set_costs(&mut self, coeffs: &[(usize, Rational)]) {
        let nv = self.nvars();
        self.cost = vec![Rational::zero(); nv];
        for (j, c) in coeffs {
            self.cost[*j] += c;
        }
        self.recompute_reduced();
    }

    #[allow(clippy::needless_range_loop)]
    fn recompute_reduced(&mut self) {
        let nv = self.nvars();
        let mut red = self.cost.clone();
        for (i, row) in self.d.iter().enumerate() {
            let cb = &self.cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, dij) in row.iter().enumerate() {
                if !dij.is_zero() {
                    red[j] += cb * dij;
                }
            }
        }
        for j in 0..nv {
            if self.row_of[j].is_some() {
                red[j] = Rational::zero();
            }
        }
        self.reduced = red;
    }

    /// Objective `Σ cost·x` at the current point.
    pub fn objective(&self) -> Rational {
        let mut s = Rational::zero();
        for (c, v) in self.cost.iter().zip(&self.value) {
            if !c.is_zero() {
                s += c * v;
            }
        }
        s
    }

    #[allow(clippy::needless_range_loop)]
    fn pivot(&mut self, p: usize, q: usize) {
        self.pivots += 1;
        let nv = self.nvars();
        let leaving = self.basis[p];
        let piv = self.d[p][q].clone();
        debug_assert!(!piv.is_zero());
        let inv = piv.recip();
        // x_q = (x_leaving − Σ_{j≠q} D[p][j] x_j) / piv
        let mut newrow = vec![Rational::zero(); nv];
        let mut nz = Vec::new();
        for j in 0..nv {
            if j == q {
                continue;
            }
            let v = &self.d[p][j];
            if !v.is_zero() {
                newrow[j] = -(v * &inv);
                nz.push(j);
            }
        }
        newrow[leaving] = inv.clone();
        nz.push(leaving);
        for i in 0..self.d.len() {
            if i == p {
                continue;
            }
            let f = self.d[i][q].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.d[i];
            row[q] = Rational::zero();
            for &j in &nz {
                let add = &f * &newrow[j];
                row[j] += add;
            }
        }
        let f = self.reduced[q].clone();
        if !f.is_zero() {
            self.reduced[q] = Rational::zero();
            for &j in &nz {
                let add = &f * &newrow[j];
                self.reduced[j] += add;
            }
        }
        self.d[p] = newrow;
        self.basis[p] = q;
        self.row_of[q] = Some(p);
        self.row_of[leaving] = None;
    }

    /// Primal simplex on the current reduced costs; requires a feasible basis.
    ///
    /// Prices by largest reduced cost and falls back to Bland's rule for the
    /// rest of the call once a run of degenerate pivots is seen.
    fn primal(&mut self) -> Result<(), Vec<Rational>> {
        let mut degenerate_run = 0u32;
        let mut bland = false;
        loop {
            let nv = self.nvars();
            let mut entering: Option<(usize, bool)> = None;
            for j in 0..nv {
                if self.row_of[j].is_some() || self.is_fixed(j) {
                    continue;
                }
                let r = &self.reduced[j];
                let cand = if r.is_negative() && self.upper[j].as_ref().is_none_or(|u| self.value[j] < *u) {
                    Some(true)
                } else if r.is_positive() && self.lower[j].as_ref().is_none_or(|l| self.value[j] > *l) {
                    Some(false)
                } else {
                    None
                };
                let Some(up) = cand else { continue };
                if bland {
                    entering = Some((j, up));
                    break;
                }
                if entering.is_none_or(|(e, _)| r.abs() > self.reduced[e].abs()) {
                    entering = Some((j, up));
                }
            }
            let Some((q, up)) = entering else { return Ok(()) };

            // Ratio test. `best` = (step, variable index, row or None for a bound flip).
            let mut best: Option<(Rational, usize, Option<usize>)> = None;
            if let (Some(l), Some(u)) = (&self.lower[q], &self.upper[q]) {
                best = Some((u - l, q, None));
            }
            for i in 0..self.d.len() {
                let a = &self.d[i][q];
                if a.is_zero() {
                    continue;
                }
                let rate = if up { a.clone() } else { -a };
                let b = self.basis[i];
                let limit = if rate.is_positive() {
                    self.upper[b].as_ref().map(|u| (u - &self.value[b]) / &rate)
                } else {
                    self.lower[b].as_ref().map(|l| (&self.value[b] - l) / (-&rate))
                };
                if let Some(t) = limit {
                    let better = match &best {
                        None => true,
                        Some((bt, bv, brow)) => t < *bt || (t == *bt && brow.is_some() && b < *bv),
                    };
                    if better {
                        best = Some((t, b, Some(i)));
                    }
                }
            }
            let Some((t, _, row)) = best else {
                let mut ray = vec![Rational::zero(); self.n_struct];
                let dir = if up { Rational::one() } else { -Rational::one() };
                if q < self.n_struct {
                    ray[q] = dir.clone();
                }
                for i in 0..self.d.len() {
                    let b = self.basis[i];
                    if b < self.n_struct {
                        ray[b] = &self.d[i][q] * &dir;
                    }
                }
                return Err(ray);
            };
            if t.is_zero() {
                degenerate_run += 1;
                if degenerate_run > 50 {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            let step = if up { t.clone() } else { -&t };
            if !step.is_zero() {
                self.value[q] += &step;
                for i in 0..self.d.len() {
                    let a = &self.d[i][q];
                    if !a.is_zero() {
                        let b = self.basis[i];
                        let inc = a * &step;
                        self.value[b] += inc;
                    }
                }
            }
            match row {
                None => {
                    // Snap exactly onto the opposite bound.
                    self.value[q] = if up {
                        self.upper[q].clone().unwrap()
                    } else {
                        self.lower[q].clone().unwrap()
                    };
                }
                Some(p) => {
                    let b = self.basis[p];
                    let a = &self.d[p][q];
                    let rate_pos = if up { a.is_positive() } else { a.is_negative() };
                    self.value[b] = if rate_pos {
                        self.upper[b].clone().unwrap()
                    } else {
                        self.lower[b].clone().unwrap()
                    };
                    self.pivot(p, q);
                }
            }
        }
    }

    /// Phase 1 from the current basis. Returns `false` when infeasible, leaving
    /// phase 1 multipliers in the reduced costs.
    pub fn make_feasible(&mut self) -> bool {
        let violated: Vec<usize> = (0..self.d.len())
            .filter(|&i| {
                let b = self.basis[i];
                self.below(b) || self.above(b)
            })
            .collect();
        if violated.is_empty() {
            return true;
        }
        let saved_cost = std::mem::take(&mut self.cost);
        let first_art = self.nvars();
        for (k, &i) in violated.iter().enumerate() {
            let b = self.basis[i];
            let target = if self.below(b) {
                self.lower[b].clone().unwrap()
            } else {
                self.upper[b].clone().unwrap()
            };
            let gap = &target - &self.value[b];
            let sigma = if gap.is_positive() { Rational::one() } else { -Rational::one() };
            let a = first_art + k;
            for row in self.d.iter_mut() {
                row.push(Rational::zero());
            }
            self.lower.push(Some(Rational::zero()));
            self.upper.push(None);
            self.value.push(gap.abs());
            self.row_of.push(Some(i));
            // a = σ x_b − σ D_i x_N
            let row = &mut self.d[i];
            for x in row.iter_mut() {
                if !x.is_zero() {
                    *x = -(&*x * &sigma);
                }
            }
            row[b] = sigma;
            self.value[b] = target;
            self.row_of[b] = None;
            self.basis[i] = a;
        }
        let nv = self.nvars();
        let mut cost = vec![Rational::zero(); nv];
        for c in cost.iter_mut().skip(first_art) {
            *c = Rational::one();
        }
        self.cost = cost;
        self.recompute_reduced();
        self.primal().expect("phase 1 is bounded below");
        let infeasible = self.objective().is_positive();
        if !infeasible {
            self.remove_artificials(first_art);
        }
        let mut cost = saved_cost;
        if infeasible {
            // Keep phase 1 multipliers; costs are padded for the artificial columns.
            cost.resize(self.nvars(), Rational::zero());
            self.cost = cost;
            return false;
        }
        self.cost = cost;
        self.recompute_reduced();
        true
    }

    fn remove_artificials(&mut self, first_art: usize) {
        let nv = self.nvars();
        let mut p = 0;
        while p < self.d.len() {
            let b = self.basis[p];
            if b < first_art {
                p += 1;
                continue;
            }
            let q = (0..first_art).find(|&j| self.row_of[j].is_none() && !self.d[p][j].is_zero());
            match q {
                Some(q) => {
                    self.pivot(p, q);
                    p += 1;
                }
                None => {
                    // Redundant row: the artificial is identically zero.
                    self.d.remove(p);
                    self.basis.remove(p);
                    self.row_of[b] = None;
                    for r in self.row_of.iter_mut().flatten() {
                        if *r > p {
                            *r -= 1;
                        }
                    }
                }
            }
        }
        for row in self.d.iter_mut() {
            row.truncate(first_art);
        }
        self.lower.truncate(first_art);
        self.upper.truncate(first_art);
        self.value.truncate(first_art);
        self.row_of.truncate(first_art);
        self.cost.truncate(first_art.min(self.cost.len()));
        self.reduced.truncate(first_art.min(nv));
    }

    /// Dual simplex from a dual-feasible basis (e.g. an optimal basis after a
    /// bound change). Returns `None` if the basis is not dual feasible or the
    /// iteration budget runs out, `Some(false)` if the LP is infeasible.
    fn dual(&mut self) -> Option<bool> {
        let nv = self.nvars();
        for j in 0..nv {
            if self.row_of[j].is_some() || self.is_fixed(j) {
                continue;
            }
            let r = &self.reduced[j];
            let can_up = self.upper[j].as_ref().is_none_or(|u| self.value[j] < *u);
            let can_down = self.lower[j].as_ref().is_none_or(|l| self.value[j] > *l);
            if (r.is_negative() && can_up) || (r.is_positive() && can_down) {
                return None;
            }
        }
        let budget = 50 * (self.d.len() + nv) as u64 + 1000;
        for _ in 0..budget {
            // Leaving: the basic variable of smallest index that violates a bound.
            let mut leave: Option<(usize, usize)> = None;
            for (i, &b) in self.basis.iter().enumerate() {
                if (self.below(b) || self.above(b)) && leave.is_none_or(|(_, lb)| b < lb) {
                    leave = Some((i, b));
                }
            }
            let Some((p, b)) = leave else { return Some(true) };
            let raise = self.below(b);
            let target = if raise { self.lower[b].clone().unwrap() } else { self.upper[b].clone().unwrap() };
            // Entering: keeps reduced costs sign-feasible; min |r_j / D_pj|, ties by index.
            let mut best: Option<(Rational, usize)> = None;
            for j in 0..nv {
                if self.row_of[j].is_some() || self.is_fixed(j) {
                    continue;
                }
                let a = &self.d[p][j];
                if a.is_zero() {
                    continue;
                }
                // Direction x_j must move so that x_b moves toward its bound.
                let inc = a.is_positive() == raise;
                let movable = if inc {
                    self.upper[j].as_ref().is_none_or(|u| self.value[j] < *u)
                } else {
                    self.lower[j].as_ref().is_none_or(|l| self.value[j] > *l)
                };
                if !movable {
                    continue;
                }
                let ratio = (&self.reduced[j] / a).abs();
                if best.as_ref().is_none_or(|(br, _)| ratio < *br) {
                    best = Some((ratio, j));
                }
            }
            let Some((_, q)) = best else { return Some(false) };
            let delta = (&target - &self.value[b]) / &self.d[p][q];
            self.value[q] += &delta;
            for i in 0..self.d.len() {
                let a = &self.d[i][q];
                if !a.is_zero() {
                    let bi = self.basis[i];
                    let inc = a * &delta;
                    self.value[bi] += inc;
                }
            }
            self.value[b] = target;
            self.pivot(p, q);
        }
        None
    }

    /// Re-optimizes after bound changes: dual simplex when the basis allows,
    /// otherwise phase 1 and phase 2.
    pub fn resolve(&mut self) -> LpOutcome {
        match self.dual() {
            Some(false) => LpOutcome::Infeasible,
            Some(true) => match self.primal() {
                Ok(()) => LpOutcome::Optimal,
                Err(ray) => LpOutcome::Unbounded(ray),
            },
            None => self.solve(),
        }
    }

    /// Phase 1 then phase 2 on the current costs.
    pub fn solve(&mut self) -> LpOutcome {
        if !self.make_feasible() {
            return LpOutcome::Infeasible;
        }
        match self.primal() {
            Ok(()) => LpOutcome::Optimal,
            Err(ray) => LpOutcome::Unbounded(ray),
        }
    }

    /// Reduced costs of the row activity variables (zero when basic).
    pub fn row_duals(&self) -> Vec<Rational> {
        (0..self.n_rows)
            .map(|i| {
                let j = self.n_struct + i;
                if self.row_of[j].is_some() {
                    Rational::zero()
                } else {
                    self.reduced[j].clone()
                }
            })
            .collect()
    }
}

fn min_costs(obj: &Option<Objective>) -> (Vec<(usize, Rational)>, bool) {
    match obj {
        None => (Vec::new(), false),
        Some(o) => match o.sense {
            Sense::Minimize => (o.coeffs.clone(), false),
            Sense::Maximize => (o.coeffs.iter().map(|(j, c)| (*j, -c)).collect(), true),
        },
    }
}

fn finish(lp: &LinearProgram, s: &Simplex, outcome: LpOutcome, negate: bool) -> Solution {
    match outcome {
        LpOutcome::Optimal => {
            let values = s.structural_values();
            let objective = Some(lp.objective_value(&values));
            let mut duals = s.row_duals();
            if negate {
                duals = duals.into_iter().map(|d| -d).collect();
            }
            Solution {
                status: Status::Optimal,
                values,
                objective,
                row_duals: duals,
                ray: None,
                objective_values: Vec::new(),
            }
        }
        LpOutcome::Infeasible => {
            let mut sol = Solution::status_only(Status::Infeasible);
            sol.row_duals = s.row_duals();
            sol
        }
        LpOutcome::Unbounded(ray) => {
            let mut sol = Solution::status_only(Status::Unbounded);
            sol.ray = Some(ray);
            sol
        }
    }
}

/// Solves the LP relaxation (binary variables are treated as `[0,1]`).
pub fn solve_lp(lp: &LinearProgram) -> Solution {
    let (costs, negate) = min_costs(&lp.objective);
    let mut s = Simplex::new(lp);
    s.set_costs(&costs);
    let out = s.solve();
    finish(lp, &s, out, negate)
}

/// An LP whose feasible region stays fixed while objectives change; each
/// re-optimization starts from the previous optimal basis.
#[derive(Debug, Clone)]
pub struct LpSession {
    lp: LinearProgram,
    simplex: Simplex,
    feasible: bool,
}

impl LpSession {
    pub fn new(lp: LinearProgram) -> LpSession {
        let mut simplex = Simplex::new(&lp);
        let feasible = simplex.make_feasible();
        LpSession { lp, simplex, feasible }
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    pub fn program(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn optimize(&mut self, sense: Sense, coeffs: Vec<(usize, Rational)>) -> Solution {
        if !self.feasible {
            return Solution::status_only(Status::Infeasible);
        }
        let obj = Some(Objective { sense, coeffs });
        let (costs, negate) = min_costs(&obj);
        self.lp.objective = obj;
        self.simplex.set_costs(&costs);
        let out = match self.simplex.primal() {
            Ok(()) => LpOutcome::Optimal,
            Err(ray) => LpOutcome::Unbounded(ray),
        };
        let sol = finish(&self.lp, &self.simplex, out, negate);
        if sol.status == Status::Unbounded {
            // The basis stays feasible but is no longer optimal for anything; restart.
            self.simplex = Simplex::new(&self.lp);
            self.feasible = self.simplex.make_feasible();
        }
        sol
    }
}

/// Node budget for branch and bound, read from `PTAWIT_NODE_LIMIT`.
pub fn node_limit() -> u64 {
    std::env::var("PTAWIT_NODE_LIMIT").ok().and_then(|s| s.parse().ok()).unwrap_or(1_000_000)
}

/// Objective is integral on integral points: integer coefficients on binaries only.
fn integral_objective(lp: &LinearProgram, costs: &[(usize, Rational)]) -> bool {
    costs
        .iter()
        .all(|(j, c)| c.is_zero() || (c.is_integer() && lp.vars[*j].kind == VarKind::Binary))
}

/// Exact branch and bound over the binary variables.
///
/// Depth-first; branches on the most fractional binary (ties by index) and
/// explores the child nearer to the rounded value first (ties go to 1).
pub fn solve_milp(lp: &LinearProgram) -> Solution {
    let bins = lp.binaries();
    let (costs, negate) = min_costs(&lp.objective);
    let integral = integral_objective(lp, &costs);
    let limit = node_limit();

    let mut node = Simplex::new(lp);
    node.set_costs(&costs);
    match node.solve() {
        LpOutcome::Optimal => {}
        other => return finish(lp, &node, other, negate),
    }
    if bins.is_empty() {
        return finish(lp, &node, LpOutcome::Optimal, negate);
    }
    // Only used to recover when a re-solve leaves the dictionary unusable.
    let root = node.clone();
    let unit = |one: bool| if one { Rational::one() } else { Rational::zero() };

    let mut incumbent: Option<(Rational, Vec<Rational>)> = None;
    let mut nodes = 0u64;
    // Pending siblings as bound fixings relative to the root relaxation.
    let mut pending: Vec<Vec<(usize, bool)>> = Vec::new();
    let mut current: Option<Vec<(usize, bool)>> = Some(Vec::new());
    // Fixings currently applied to `node`.
    let mut applied: Vec<(usize, bool)> = Vec::new();

    loop {
        let fixes = match current.take() {
            Some(f) => f,
            None => match pending.pop() {
                None => break,
                Some(fixes) => {
                    // Backtrack on the same dictionary: undo fixings beyond the
                    // shared prefix, re-optimize, then apply the new ones.
                    let mut keep = applied.iter().zip(&fixes).take_while(|(a, b)| a == b).count();
                    if !node.is_clean() {
                        node = root.clone();
                        keep = 0;
                        applied.clear();
                    }
                    for &(j, _) in &applied[keep..] {
                        node.set_bounds(j, Some(Rational::zero()), Some(Rational::one()));
                    }
                    applied.truncate(keep);
                    if node.solve() != LpOutcome::Optimal {
                        node = root.clone();
                        applied.clear();
                        keep = 0;
                    }
                    for &(j, one) in &fixes[keep..] {
                        node.set_bounds(j, Some(unit(one)), Some(unit(one)));
                    }
                    applied = fixes.clone();
                    match node.resolve() {
                        LpOutcome::Optimal => fixes,
                        _ => {
                            nodes += 1;
                            continue;
                        }
                    }
                }
            },
        };
        nodes += 1;
        if nodes > limit {
            let mut sol = Solution::status_only(Status::NodeLimit);
            if let Some((_, x)) = &incumbent {
                sol.objective = Some(lp.objective_value(x));
                sol.values = x.clone();
            }
            return sol;
        }
        let obj = node.objective();
        let bound = if integral { Rational::from_big(obj.ceil(), 1.into()) } else { obj.clone() };
        if let Some((best, _)) = &incumbent {
            if bound >= *best {
                continue;
            }
        }
        let x = node.structural_values();
        let half = Rational::new(1, 2);
        let mut pick: Option<(Rational, usize)> = None;
        for &j in &bins {
            if x[j].is_integer() {
                continue;
            }
            let dist = (&x[j] - &half).abs();
            if pick.as_ref().is_none_or(|(bd, _)| dist < *bd) {
                pick = Some((dist, j));
            }
        }
        let Some((_, j)) = pick else {
            incumbent = Some((obj, x));
            continue;
        };
        let first_one = x[j] >= half;
        let mut other = fixes.clone();
        other.push((j, !first_one));
        pending.push(other);
        node.set_bounds(j, Some(unit(first_one)), Some(unit(first_one)));
        let mut fixes = fixes;
        fixes.push((j, first_one));
        applied = fixes.clone();
        match node.resolve() {
            LpOutcome::Optimal => current = Some(fixes),
            _ => nodes += 1,
        }
    }
    match incumbent {
        None => Solution::status_only(Status::Infeasible),
        Some((_, x)) => {
            // Re-solve the LP with all binaries fixed for consistent duals.
            let mut s = root;
            for &j in &bins {
                s.set_bounds(j, Some(x[j].clone()), Some(x[j].clone()));
            }
            let out = s.resolve();
            let sol = finish(lp, &s, out, negate);
            debug_assert!(lp.is_feasible(&sol.values));
            sol
        }
    }
}

/// Upper bound of `Σ c_j x_j` from variable bounds, if finite.
fn expr_upper(lp: &LinearProgram, coeffs: &[(usize, Rational)]) -> Option<Rational> {
    let mut s = Rational::zero();
    for (j, c) in coeffs {
        let v = &lp.vars[*j];
        let b = if c.is_positive() { v.upper.as_ref()? } else if c.is_negative() { v.lower.as_ref()? } else { continue };
        s += c * b;
    }
    Some(s)
}

fn expr_lower(lp: &LinearProgram, coeffs: &[(usize, Rational)]) -> Option<Rational> {
    let neg: Vec<_> = coeffs.iter().map(|(j, c)| (*j, -c)).collect();
    expr_upper(lp, &neg).map(|u| -u)
}

/// Complete Pareto frontier of the minimization objectives in `lp.objectives`.
///
/// Each objective must be integral on feasible points and bounded by the
/// variable bounds. Repeatedly minimizes the sum of objectives over the
/// points not weakly dominated by any frontier point found so far; every
/// such minimizer is Pareto-optimal and the search ends when none is left.
/// Dominated regions are cut off with one indicator binary per objective.
/// A node-limit stop truncates the frontier.
pub fn pareto_enumerate(lp: &LinearProgram) -> Vec<Solution> {
    let objs = lp.objectives.clone();
    if objs.is_empty() {
        return Vec::new();
    }
    let ubs: Vec<Rational> = objs
        .iter()
        .map(|o| expr_upper(lp, o).expect("Pareto objectives need bounded variables"))
        .collect();
    let lbs: Vec<Rational> = objs.iter().map(|o| expr_lower(lp, o).expect("bounded")).collect();
    let mut found = 0usize;
    pareto_enumerate_with(lp, |work, point, _| {
        // Some objective must drop by ≥ 1: f_k ≤ p_k − 1 + M(1 − δ_k), M = ub_k − p_k + 1.
        let mut deltas = Vec::new();
        for (k, o) in objs.iter().enumerate() {
            if point[k] <= lbs[k] {
                continue;
            }
            let dv = work.add_binary(format!("pareto_{found}_{k}"));
            let big_m = &ubs[k] - &point[k] + Rational::one();
            let mut row = o.clone();
            row.push((dv, big_m.clone()));
            work.add_row(row, Relation::Le, &point[k] - Rational::one() + big_m);
            deltas.push(dv);
        }
        found += 1;
        if deltas.is_empty() {
            return false;
        }
        work.add_row(deltas.iter().map(|&d| (d, Rational::one())).collect(), Relation::Ge, Rational::one());
        true
    })
    .unwrap_or_else(|partial| partial)
}

/// Pareto enumeration with a caller-supplied exclusion: `exclude(work, point,
/// values)` must add rows removing exactly the points weakly dominated by
/// `point`, or return `false` when `point` dominates everything. `Err`
/// carries the partial frontier when a solve stops without proving
/// optimality or infeasibility.
pub fn pareto_enumerate_with<F>(lp: &LinearProgram, mut exclude: F) -> Result<Vec<Solution>, Vec<Solution>>
where
    F: FnMut(&mut LinearProgram, &[Rational], &[Rational]) -> bool,
{
    let objs = lp.objectives.clone();
    if objs.is_empty() {
        return Ok(Vec::new());
    }
    let mut work = lp.clone();
    work.objectives.clear();
    let mut sum: Vec<(usize, Rational)> = Vec::new();
    for o in &objs {
        sum.extend(o.iter().cloned());
    }
    work.set_objective(Sense::Minimize, sum);
    let mut frontier: Vec<Solution> = Vec::new();
    loop {
        let mut sol = solve_milp(&work);
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible => break,
            _ => return Err(frontier),
        }
        sol.values.truncate(lp.vars.len());
        let point: Vec<Rational> = objs.iter().map(|o| dot(o, &sol.values)).collect();
        let more = exclude(&mut work, &point, &sol.values);
        sol.objective_values = point;
        sol.objective = None;
        frontier.push(sol);
        if !more {
            break;
        }
    }
    Ok(frontier)
}
