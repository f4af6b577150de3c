//! Clock regions with clamp constant `K`.
//!
//! Two valuations are equivalent when every difference `ci − cj` (including
//! `c0`) falls into the same cell of the partition
//! `(−∞,−K), {−K}, (−K,−K+1), …, {K}, (K,∞)`. For valuations with all clocks
//! at most `K` this is the classical region equivalence; above `K` it also
//! separates clock differences so that diagonal constraints with constants in
//! `[−K, K]` stay uniform on every region. Each region is a zone and is keyed
//! by its canonical DBM.

use serde::{Deserialize, Serialize};

use crate::dbm::{Dbm, Valuation};
use crate::numeric::{Bound, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClockRegion {
    k: i64,
    zone: Dbm,
}

fn class_bound(d: &Rational, k: i64) -> Bound {
    let kk = Rational::from_integer(k);
    if *d > kk {
        Bound::INF
    } else if *d < -&kk {
        Bound::lt(-k)
    } else if d.is_integer() {
        Bound::le(d.floor_i64())
    } else {
        Bound::lt(d.floor_i64() + 1)
    }
}

impl ClockRegion {
    /// The region containing `v`.
    pub fn of(v: &Valuation, k: i64) -> ClockRegion {
        let n = v.clocks();
        let dim = n + 1;
        let mut cells = vec![Bound::LE_ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    cells[i * dim + j] = class_bound(&(v.get(i) - v.get(j)), k);
                }
            }
        }
        let zone = Dbm::from_matrix(n, cells).canonicalize();
        debug_assert!(!zone.is_empty());
        ClockRegion { k, zone }
    }

    pub fn origin(clocks: usize, k: i64) -> ClockRegion {
        ClockRegion::of(&Valuation::zero(clocks), k)
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn clocks(&self) -> usize {
        self.zone.clocks()
    }

    /// The canonical DBM `M_R` of the region.
    pub fn zone(&self) -> &Dbm {
        &self.zone
    }

    /// A valuation in the region with dyadic coordinates.
    pub fn representative(&self) -> Valuation {
        self.zone.sample_point().expect("regions are non-empty")
    }

    pub fn contains(&self, v: &Valuation) -> bool {
        self.zone.satisfies(v)
    }

    /// No clock can still cross an integer at or below `K`.
    pub fn is_time_unbounded(&self) -> bool {
        let kk = Rational::from_integer(self.k);
        self.representative().values().iter().all(|x| *x > kk)
    }

    /// The immediate time successor, or `None` for time-unbounded regions.
    pub fn time_successor(&self) -> Option<ClockRegion> {
        let v = self.representative();
        let kk = Rational::from_integer(self.k);
        let mut dmin: Option<Rational> = None;
        let mut on_integer = false;
        for x in v.values() {
            if *x > kk {
                continue;
            }
            let step = if x.is_integer() {
                on_integer = true;
                Rational::one()
            } else {
                Rational::from_big(x.ceil(), 1.into()) - x
            };
            dmin = Some(match dmin {
                None => step,
                Some(m) => m.min(step),
            });
        }
        let d = dmin?;
        let t = if on_integer { d / Rational::from_integer(2) } else { d };
        Some(ClockRegion::of(&v.delay(&t), self.k))
    }

    /// The region of `v[C:=0]` for any `v` in this region.
    pub fn reset(&self, clocks: &[usize]) -> ClockRegion {
        ClockRegion::of(&self.representative().reset(clocks), self.k)
    }

    /// Does every valuation of the region satisfy `g`? Guards and invariants
    /// with constants in `[−K, K]` are uniform on regions, so one point decides.
    pub fn satisfies(&self, g: &Dbm) -> bool {
        g.satisfies(&self.representative())
    }

    /// All regions with every clock in `[0, K]`, via a grid of step `1/(n+1)`.
    pub fn enumerate_bounded(clocks: usize, k: i64) -> Vec<ClockRegion> {
        let steps = (k as usize) * (clocks + 1);
        let den = (clocks + 1) as i64;
        let mut out = std::collections::BTreeSet::new();
        let mut idx = vec![0usize; clocks];
        loop {
            let vals = idx.iter().map(|&i| Rational::new(i as i64, den)).collect();
            out.insert(ClockRegion::of(&Valuation::from_clocks(vals), k));
            let mut p = 0;
            loop {
                if p == clocks {
                    return out.into_iter().collect();
                }
                idx[p] += 1;
                if idx[p] <= steps {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
    }
}
