//! Difference bounds matrices over clocks `c0..cn`, with `c0` the zero clock.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{Bound, BoundValue, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DbmError {
    #[error("DBMs range over different clock sets ({0} vs {1} clocks)")]
    ClockMismatch(usize, usize),
    #[error("operation requires a non-empty zone")]
    EmptyInput,
    #[error("operation requires canonical input")]
    NonCanonicalInput,
    #[error("canonical DBM of an empty set is undefined")]
    EmptySet,
}

/// A clock valuation. Index 0 is the zero clock and is always 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Valuation(Vec<Rational>);

impl Valuation {
    pub fn zero(clocks: usize) -> Self {
        Valuation(vec![Rational::zero(); clocks + 1])
    }

    /// Builds a valuation from the values of `c1..cn`.
    pub fn from_clocks(values: Vec<Rational>) -> Self {
        let mut v = Vec::with_capacity(values.len() + 1);
        v.push(Rational::zero());
        v.extend(values);
        assert!(v.iter().all(|x| !x.is_negative()), "negative clock value");
        Valuation(v)
    }

    pub fn clocks(&self) -> usize {
        self.0.len() - 1
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn values(&self) -> &[Rational] {
        &self.0[1..]
    }

    pub fn delay(&self, t: &Rational) -> Valuation {
        let mut v = self.0.clone();
        for x in v.iter_mut().skip(1) {
            *x += t;
        }
        Valuation(v)
    }

    pub fn reset(&self, clocks: &[usize]) -> Valuation {
        let mut v = self.0.clone();
        for &c in clocks {
            v[c] = Rational::zero();
        }
        Valuation(v)
    }
}

/// A DBM; `cells == None` is the distinguished empty zone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dbm {
    dim: usize,
    cells: Option<Vec<Bound>>,
}

impl Dbm {
    /// All valuations over `clocks` clocks (canonical).
    pub fn universe(clocks: usize) -> Dbm {
        let dim = clocks + 1;
        let mut cells = vec![Bound::INF; dim * dim];
        for i in 0..dim {
            cells[i * dim + i] = Bound::LE_ZERO;
            cells[i] = Bound::LE_ZERO;
        }
        Dbm { dim, cells: Some(cells) }
    }

    pub fn empty(clocks: usize) -> Dbm {
        Dbm { dim: clocks + 1, cells: None }
    }

    /// The single point where every clock is 0.
    pub fn origin(clocks: usize) -> Dbm {
        let dim = clocks + 1;
        Dbm { dim, cells: Some(vec![Bound::LE_ZERO; dim * dim]) }
    }

    /// Universe tightened by the given `(i, j, bound)` constraints `ci − cj ◁ a`.
    /// The result is not canonicalized.
    pub fn from_constraints(clocks: usize, constraints: &[(usize, usize, Bound)]) -> Dbm {
        let mut m = Dbm::universe(clocks);
        for &(i, j, b) in constraints {
            let cur = m.get(i, j);
            m.set(i, j, cur.min(b));
        }
        m
    }

    /// Builds a DBM from a full row-major matrix.
    pub fn from_matrix(clocks: usize, cells: Vec<Bound>) -> Dbm {
        let dim = clocks + 1;
        assert_eq!(cells.len(), dim * dim);
        Dbm { dim, cells: Some(cells) }
    }

    pub fn clocks(&self) -> usize {
        self.dim - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_none()
    }

    /// Entry `(i, j)`; panics on the empty marker.
    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.cells.as_ref().expect("entry of empty DBM")[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, b: Bound) {
        let dim = self.dim;
        self.cells.as_mut().expect("entry of empty DBM")[i * dim + j] = b;
    }

    pub fn cells(&self) -> Option<&[Bound]> {
        self.cells.as_deref()
    }

    fn check_dim(&self, other: &Dbm) -> Result<(), DbmError> {
        if self.dim != other.dim {
            Err(DbmError::ClockMismatch(self.clocks(), other.clocks()))
        } else {
            Ok(())
        }
    }

    /// All-pairs shortest paths under `(min, +)`; returns the empty marker
    /// when a negative cycle exists.
    pub fn canonicalize(&self) -> Dbm {
        let Some(src) = &self.cells else { return self.clone() };
        let n = self.dim;
        let mut c = src.clone();
        for i in 0..n {
            c[i * n + i] = c[i * n + i].min(Bound::LE_ZERO);
            c[i] = c[i].min(Bound::LE_ZERO);
        }
        if c.iter().any(|b| b.is_neg_inf()) {
            return Dbm::empty(self.clocks());
        }
        for k in 0..n {
            for i in 0..n {
                let ik = c[i * n + k];
                if ik.is_pos_inf() {
                    continue;
                }
                for j in 0..n {
                    let kj = c[k * n + j];
                    if kj.is_pos_inf() {
                        continue;
                    }
                    let s = ik.checked_add(kj).expect("finite sum");
                    if s < c[i * n + j] {
                        c[i * n + j] = s;
                    }
                }
            }
            if (0..n).any(|i| c[i * n + i] < Bound::LE_ZERO) {
                return Dbm::empty(self.clocks());
            }
        }
        Dbm { dim: n, cells: Some(c) }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonicalize() == *self
    }

    /// Entrywise minimum (conjunction). Not canonicalized.
    pub fn intersect(&self, other: &Dbm) -> Result<Dbm, DbmError> {
        self.check_dim(other)?;
        match (&self.cells, &other.cells) {
            (Some(a), Some(b)) => Ok(Dbm {
                dim: self.dim,
                cells: Some(a.iter().zip(b).map(|(x, y)| Bound::min(*x, *y)).collect()),
            }),
            _ => Ok(Dbm::empty(self.clocks())),
        }
    }

    /// Removes upper bounds on clocks: `Val(↑M) = {v + t | v ∈ Val(M), t ≥ 0}`.
    pub fn time_closure(&self) -> Result<Dbm, DbmError> {
        if self.is_empty() {
            return Err(DbmError::EmptyInput);
        }
        let mut m = self.clone();
        for i in 1..self.dim {
            m.set(i, 0, Bound::INF);
        }
        Ok(m)
    }

    /// Entrywise maximum of two canonical DBMs; the smallest zone containing both.
    /// The empty marker is neutral.
    pub fn zone_closure(&self, other: &Dbm) -> Result<Dbm, DbmError> {
        self.check_dim(other)?;
        if !self.is_canonical() || !other.is_canonical() {
            return Err(DbmError::NonCanonicalInput);
        }
        match (&self.cells, &other.cells) {
            (None, _) => Ok(other.clone()),
            (_, None) => Ok(self.clone()),
            (Some(a), Some(b)) => Ok(Dbm {
                dim: self.dim,
                cells: Some(a.iter().zip(b).map(|(x, y)| Bound::max(*x, *y)).collect()),
            }),
        }
    }

    /// `Val(other) ⊆ Val(self)`.
    pub fn includes(&self, other: &Dbm) -> Result<bool, DbmError> {
        self.check_dim(other)?;
        let a = self.canonicalize();
        let b = other.canonicalize();
        Ok(match (&a.cells, &b.cells) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => y.iter().zip(x).all(|(p, q)| p <= q),
        })
    }

    /// Semantic equality (equal canonical forms).
    pub fn equivalent(&self, other: &Dbm) -> Result<bool, DbmError> {
        self.check_dim(other)?;
        Ok(self.canonicalize() == other.canonicalize())
    }

    /// Canonical DBM of `{v[C:=0] | v ∈ Val(M)}`.
    pub fn reset(&self, clocks: &[usize]) -> Result<Dbm, DbmError> {
        if self.is_empty() {
            return Err(DbmError::EmptyInput);
        }
        let mut m = self.canonicalize();
        if m.is_empty() {
            return Err(DbmError::EmptyInput);
        }
        for &c in clocks {
            for j in 0..self.dim {
                let b0j = m.get(0, j);
                let bj0 = m.get(j, 0);
                m.set(c, j, b0j);
                m.set(j, c, bj0);
            }
            m.set(c, 0, Bound::LE_ZERO);
            m.set(0, c, Bound::LE_ZERO);
            m.set(c, c, Bound::LE_ZERO);
        }
        // Reset clocks share row/column with c0; canonical form is preserved.
        for &a in clocks {
            for &b in clocks {
                m.set(a, b, Bound::LE_ZERO);
            }
        }
        Ok(m)
    }

    pub fn satisfies(&self, v: &Valuation) -> bool {
        let Some(cells) = &self.cells else { return false };
        assert_eq!(v.clocks(), self.clocks(), "valuation dimension mismatch");
        for i in 0..self.dim {
            for j in 0..self.dim {
                let b = cells[i * self.dim + j];
                if b.is_pos_inf() {
                    continue;
                }
                if !b.admits(&(v.get(i) - v.get(j))) {
                    return false;
                }
            }
        }
        true
    }

    /// Largest finite upper bound on any clock, or `None` if some clock is unbounded.
    pub fn max_upper(&self) -> Option<i64> {
        let m = self.canonicalize();
        if m.is_empty() {
            return Some(0);
        }
        let mut best = 0;
        for i in 1..self.dim {
            {
                let a = m.get(i, 0).finite()?;
                best = best.max(a)
            }
        }
        Some(best)
    }

    pub fn is_bounded(&self) -> bool {
        self.max_upper().is_some()
    }

    /// `true` iff `Val(M)` has non-empty interior in `R^n`.
    pub fn is_full_dimensional(&self) -> bool {
        let m = self.canonicalize();
        if m.is_empty() {
            return false;
        }
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                match (m.get(i, j).finite(), m.get(j, i).finite()) {
                    (Some(a), Some(b)) if a + b <= 0 => return false,
                    _ => {}
                }
            }
        }
        true
    }

    /// Some valuation in `Val(M)`, chosen greedily clock by clock at interval
    /// midpoints. Requires a canonical non-empty DBM.
    #[allow(clippy::needless_range_loop)]
    pub fn sample_point(&self) -> Result<Valuation, DbmError> {
        if self.is_empty() {
            return Err(DbmError::EmptyInput);
        }
        let m = self.canonicalize();
        if m.is_empty() {
            return Err(DbmError::EmptyInput);
        }
        let n = m.dim;
        let mut vals = vec![Rational::zero(); n];
        for k in 1..n {
            // lower: v_k ≥ v_i − M[i][k]; upper: v_k ≤ v_i + M[k][i]
            let mut lo: Option<(Rational, bool)> = None;
            let mut hi: Option<(Rational, bool)> = None;
            for i in 0..k {
                let bik = m.get(i, k);
                if let Some(a) = bik.finite() {
                    let cand = &vals[i] - Rational::from_integer(a);
                    let strict = bik.is_strict();
                    lo = Some(match lo {
                        None => (cand, strict),
                        Some((cur, cs)) => {
                            if cand > cur || (cand == cur && strict) {
                                (cand, strict)
                            } else {
                                (cur, cs)
                            }
                        }
                    });
                }
                let bki = m.get(k, i);
                if let Some(a) = bki.finite() {
                    let cand = &vals[i] + Rational::from_integer(a);
                    let strict = bki.is_strict();
                    hi = Some(match hi {
                        None => (cand, strict),
                        Some((cur, cs)) => {
                            if cand < cur || (cand == cur && strict) {
                                (cand, strict)
                            } else {
                                (cur, cs)
                            }
                        }
                    });
                }
            }
            let (l, _) = lo.expect("canonical DBM bounds clocks below by c0");
            vals[k] = match hi {
                None => l + Rational::one(),
                Some((h, _)) if h == l => h,
                Some((h, _)) => (l + h) / Rational::from_integer(2),
            };
        }
        vals.remove(0);
        Ok(Valuation::from_clocks(vals))
    }

    /// One constraint per line, omitting `(∞,<)` and trivial diagonal entries.
    pub fn dump(&self, names: &[String]) -> String {
        let Some(_) = &self.cells else { return "false\n".to_string() };
        let name = |i: usize| if i == 0 { "0".to_string() } else { names[i - 1].clone() };
        let mut out = String::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let b = self.get(i, j);
                if b.is_pos_inf() {
                    continue;
                }
                let op = if b.is_strict() { "<" } else { "<=" };
                let a = match b.value() {
                    BoundValue::Fin(a) => a.to_string(),
                    BoundValue::NegInf => "-inf".to_string(),
                    BoundValue::PosInf => unreachable!(),
                };
                out.push_str(&format!("{} - {} {} {}\n", name(i), name(j), op, a));
            }
        }
        out
    }

    /// Compact conjunction used in DOT labels, e.g. `x<=2 & y-x<1`.
    pub fn label(&self, names: &[String]) -> String {
        if self.is_empty() {
            return "false".to_string();
        }
        let m = self.canonicalize();
        let parts = crate::model::atoms_from_dbm(&m);
        if parts.is_empty() {
            return "true".to_string();
        }
        parts.iter().map(|a| a.render(names)).collect::<Vec<_>>().join(" & ")
    }
}

impl fmt::Debug for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.cells {
            None => write!(f, "Dbm(empty)"),
            Some(c) => {
                write!(f, "Dbm[")?;
                for i in 0..self.dim {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    for j in 0..self.dim {
                        if j > 0 {
                            write!(f, " ")?;
                        }
                        write!(f, "{}", c[i * self.dim + j])?;
                    }
                }
                write!(f, "]")
            }
        }
    }
}

/// Smallest zone containing the union of the given zones (iterated `⊔`).
pub fn canonical_dbm_of_union(clocks: usize, zones: &[Dbm]) -> Result<Dbm, DbmError> {
    let mut acc = Dbm::empty(clocks);
    for z in zones {
        acc = acc.zone_closure(&z.canonicalize())?;
    }
    if acc.is_empty() {
        return Err(DbmError::EmptySet);
    }
    Ok(acc)
}
