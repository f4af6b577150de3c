//! Exact zone volumes by counting full-dimensional region cells.
//!
//! The box `[0, K]^n` splits into `K^n · n!` open simplices, one per integer
//! vector and ordering of fractional parts. A zone with integer bounds is a
//! union of such cells up to a null set, so its volume is `hits / n!`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dbm::Dbm;
use crate::numeric::{Bound, BoundValue, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VolumeError {
    #[error("zone is not bounded by K = {0}")]
    UnboundedZone(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeResult {
    pub value: Rational,
    pub cells: u64,
    pub clocks: usize,
}

impl VolumeResult {
    /// `n!`, the number of cells per unit cube.
    pub fn granularity(&self) -> u64 {
        factorial(self.clocks)
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { return out };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Volume of `Val(M) ∩ [0, K]^n`; fails if some clock is not bounded by `K`.
pub fn dbm_volume(m: &Dbm, k: i64) -> Result<VolumeResult, VolumeError> {
    let n = m.clocks();
    let m = m.canonicalize();
    if m.is_empty() {
        return Ok(VolumeResult { value: Rational::zero(), cells: 0, clocks: n });
    }
    for i in 1..=n {
        match m.get(i, 0).value() {
            BoundValue::Fin(a) if a <= k => {}
            _ => return Err(VolumeError::UnboundedZone(k)),
        }
    }
    let dim = n + 1;
    let scale = dim as i64;
    // Scaled finite bounds; strictness never matters on interior points.
    let bounds: Vec<Option<i64>> = m
        .cells()
        .unwrap()
        .iter()
        .map(|b: &Bound| b.finite().map(|a| a * scale))
        .collect();
    let perms = permutations(n);
    let k = k.max(0) as usize;
    let total_ints = k.pow(n as u32);
    let hits: u64 = (0..total_ints)
        .into_par_iter()
        .map(|code| {
            let mut ints = vec![0i64; n];
            let mut c = code;
            for slot in ints.iter_mut() {
                *slot = (c % k) as i64;
                c /= k;
            }
            let mut val = vec![0i64; dim];
            let mut count = 0u64;
            for p in &perms {
                // clock p[pos] has fractional part (pos+1)/(n+1)
                for (pos, &c) in p.iter().enumerate() {
                    val[c + 1] = ints[c] * scale + pos as i64 + 1;
                }
                let inside = (0..dim).all(|i| {
                    (0..dim).all(|j| i == j || match bounds[i * dim + j] {
                        Some(b) => val[i] - val[j] < b,
                        None => true,
                    })
                });
                if inside {
                    count += 1;
                }
            }
            count
        })
        .sum();
    let value = Rational::new(hits as i64, factorial(n) as i64);
    Ok(VolumeResult { value, cells: hits, clocks: n })
}

/// The order-polytope DBM: the unit cube with `c_i ≤ c_j` for `(i, j) ∈ I`
/// (1-based clock indices). Not canonicalized.
pub fn mi_generator(pairs: &[(usize, usize)], n: usize) -> Dbm {
    let dim = n + 1;
    let mut cells = vec![Bound::le(1); dim * dim];
    for i in 0..dim {
        cells[i * dim + i] = Bound::LE_ZERO;
        cells[i] = Bound::LE_ZERO;
    }
    for &(i, j) in pairs {
        assert!(i >= 1 && i <= n && j >= 1 && j <= n && i != j, "pair out of range");
        cells[i * dim + j] = Bound::LE_ZERO;
    }
    Dbm::from_matrix(n, cells)
}
