//! Generators and oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ptawit::dbm::{Dbm, Valuation};
use ptawit::model::{Branch, ClockConstraint, Pta, Transition};
use ptawit::numeric::{Bound, Rational};
use ptawit::parser::parse;
use ptawit::quotient::{build_quotient, proceed_violations, QuotientMdp};

pub const CLOCK_NAMES: [&str; 3] = ["x", "y", "z"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn fig1() -> Pta {
    parse(&fixture("fig1.pta")).unwrap()
}

fn atom(rng: &mut ChaCha8Rng, clocks: usize, k: i64, upper: bool) -> String {
    let c = CLOCK_NAMES[rng.gen_range(0..clocks)];
    let v = rng.gen_range(if upper { 1 } else { 0 }..=k);
    let op = if upper { "<=" } else { [">=", "<=", ">"][rng.gen_range(0..3)] };
    format!("{c}{op}{v}")
}

/// Text of a random PTA with `1..=max_locs` ordinary locations, bounded
/// invariants and integer constants up to `k`.
pub fn random_pta_text(rng: &mut ChaCha8Rng, max_locs: usize, max_clocks: usize, max_k: i64) -> String {
    let clocks = rng.gen_range(1..=max_clocks);
    let k = rng.gen_range(1..=max_k);
    let locs = rng.gen_range(1..=max_locs);
    let mut names: Vec<String> = (0..locs).map(|i| format!("l{i}")).collect();
    names.push("goal".into());
    names.push("fail".into());
    let mut out = format!("clocks {};\nbound {k};\n", CLOCK_NAMES[..clocks].join(" "));
    for (i, n) in names.iter().take(locs).enumerate() {
        let mut inv = vec![atom(rng, clocks, k, true)];
        if clocks > 1 && rng.gen_bool(0.3) {
            inv.push(atom(rng, clocks, k, true));
        }
        let init = if i == 0 { " init" } else { "" };
        out.push_str(&format!("loc {n} inv \"{}\"{init};\n", inv.join(" & ")));
    }
    out.push_str("loc goal goal;\nloc fail fail;\n");
    for (i, n) in names.iter().take(locs).enumerate() {
        for a in 0..rng.gen_range(1..=2) {
            let guard = if rng.gen_bool(0.6) {
                format!(" guard \"{}\"", atom(rng, clocks, k, false))
            } else {
                String::new()
            };
            let count = rng.gen_range(1..=3);
            let weights: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=4)).collect();
            let total: i64 = weights.iter().sum();
            let mut branches = String::new();
            let mut targets: Vec<usize> = Vec::new();
            for w in &weights {
                let mut target = rng.gen_range(0..names.len());
                while targets.contains(&target) {
                    target = (target + 1) % names.len();
                }
                targets.push(target);
                let resets: Vec<&str> =
                    CLOCK_NAMES[..clocks].iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
                let reset = if resets.is_empty() { String::new() } else { format!("reset{{{}}} ", resets.join(",")) };
                branches.push_str(&format!(" {}/{total} -> {reset}{};", w, names[target]));
            }
            out.push_str(&format!("trans {n}{guard} act a{i}_{a} {{{branches} }};\n"));
        }
    }
    out
}

/// A random PTA that parses, builds a quotient and satisfies the proceed
/// assumption, together with that quotient.
pub fn random_pta(rng: &mut ChaCha8Rng, max_locs: usize, max_clocks: usize, max_k: i64) -> (Pta, QuotientMdp) {
    loop {
        let text = random_pta_text(rng, max_locs, max_clocks, max_k);
        let Ok(t) = parse(&text) else { continue };
        let Ok(m) = build_quotient(&t, t.clamp()) else { continue };
        if proceed_violations(&m).is_empty() {
            return (t, m);
        }
    }
}

/// A random non-empty canonical DBM whose entries are integer bounds in
/// `[-k, k]` (or `∞` for upper bounds).
pub fn random_dbm(rng: &mut ChaCha8Rng, clocks: usize, k: i64) -> Dbm {
    loop {
        let mut cons = Vec::new();
        for i in 0..=clocks {
            for j in 0..=clocks {
                if i == j || !rng.gen_bool(0.5) {
                    continue;
                }
                let c = rng.gen_range(-k..=k);
                let b = if rng.gen_bool(0.5) { Bound::le(c) } else { Bound::lt(c) };
                cons.push((i, j, b));
            }
        }
        let m = Dbm::from_constraints(clocks, &cons).canonicalize();
        if !m.is_empty() {
            return m;
        }
    }
}

/// `random_dbm` intersected with the box `[0, k]^n`.
pub fn random_bounded_dbm(rng: &mut ChaCha8Rng, clocks: usize, k: i64) -> Dbm {
    let cube: Vec<_> = (1..=clocks).map(|i| (i, 0, Bound::le(k))).collect();
    let cube = Dbm::from_constraints(clocks, &cube);
    loop {
        let m = random_dbm(rng, clocks, k).intersect(&cube).unwrap().canonicalize();
        if !m.is_empty() {
            return m;
        }
    }
}

/// A uniformly random point of the grid `(1/den)·Z^n ∩ [0, hi]^n`.
pub fn grid_point(rng: &mut ChaCha8Rng, clocks: usize, hi: i64, den: i64) -> Valuation {
    Valuation::from_clocks((0..clocks).map(|_| Rational::new(rng.gen_range(0..=hi * den), den)).collect())
}

/// A random structural pruning of `t`: drops locations (their incoming mass
/// goes to fail), shrinks invariants and guards and deletes transitions.
/// The result is not guaranteed to be a subsystem.
pub fn random_pruning(rng: &mut ChaCha8Rng, t: &Pta) -> Pta {
    let n = t.clock_count();
    let k = t.clamp().max(1);
    let mut keep: Vec<bool> = (0..t.locations.len())
        .map(|l| l == t.initial || t.is_absorbing(l) || !rng.gen_bool(0.25))
        .collect();
    keep[t.goal] = true;
    keep[t.fail] = true;
    let index: Vec<Option<usize>> = {
        let mut next = 0;
        keep.iter()
            .map(|&k| {
                k.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let fail = index[t.fail].unwrap();
    let shrink = |rng: &mut ChaCha8Rng, c: &ClockConstraint| -> ClockConstraint {
        if !rng.gen_bool(0.3) {
            return c.clone();
        }
        let clock = rng.gen_range(1..=n);
        let v = rng.gen_range(0..=k);
        let extra = if rng.gen_bool(0.5) {
            Dbm::from_constraints(n, &[(clock, 0, Bound::le(v))])
        } else {
            Dbm::from_constraints(n, &[(0, clock, Bound::le(-v))])
        };
        ClockConstraint::from_dbm(&c.dbm().intersect(&extra).unwrap().canonicalize())
    };
    let mut out = t.clone();
    out.locations = Vec::new();
    for (l, loc) in t.locations.iter().enumerate() {
        if !keep[l] {
            continue;
        }
        let mut nl = loc.clone();
        if !t.is_absorbing(l) {
            nl.invariant = if l == t.initial { loc.invariant.clone() } else { shrink(rng, &loc.invariant) };
            nl.transitions = Vec::new();
            for tr in &loc.transitions {
                if loc.transitions.len() > 1 && rng.gen_bool(0.15) {
                    continue;
                }
                let mut branches: Vec<Branch> = Vec::new();
                for b in &tr.branches {
                    let target = index[b.target].unwrap_or(fail);
                    let resets = if target == fail { Vec::new() } else { b.resets.clone() };
                    match branches.iter_mut().find(|x| x.target == target && x.resets == resets) {
                        Some(x) => x.prob += &b.prob,
                        None => branches.push(Branch { prob: b.prob.clone(), resets, target }),
                    }
                }
                nl.transitions.push(Transition { guard: shrink(rng, &tr.guard), action: tr.action.clone(), branches });
            }
        }
        out.locations.push(nl);
    }
    out.initial = index[t.initial].unwrap();
    out.goal = index[t.goal].unwrap();
    out.fail = fail;
    out
}

/// A random subset of the region states of `m`, always containing the initial state.
pub fn random_region_set(rng: &mut ChaCha8Rng, m: &QuotientMdp) -> Vec<usize> {
    let mut r: BTreeSet<usize> = m.region_states().into_iter().filter(|_| rng.gen_bool(0.6)).collect();
    if !m.is_target(m.initial) {
        r.insert(m.initial);
    }
    r.into_iter().collect()
}

/// Every strict partial order on `1..=n`, as its set of pairs `(i, j)` with `i < j` in the order.
pub fn all_posets(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> =
        (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let rel: BTreeSet<(usize, usize)> =
            pairs.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, p)| *p).collect();
        let antisym = rel.iter().all(|&(i, j)| !rel.contains(&(j, i)));
        let trans = rel.iter().all(|&(i, j)| rel.iter().filter(|&&(a, _)| a == j).all(|&(_, c)| rel.contains(&(i, c))));
        if antisym && trans {
            out.push(rel.into_iter().collect());
        }
    }
    out
}

/// Number of permutations of `1..=n` that respect every `(i, j)`: `i` before `j`.
pub fn linear_extensions(n: usize, rel: &[(usize, usize)]) -> u64 {
    let mut perm: Vec<usize> = (1..=n).collect();
    let mut count = 0;
    permute(&mut perm, 0, &mut |p| {
        let pos = |c: usize| p.iter().position(|&x| x == c).unwrap();
        if rel.iter().all(|&(i, j)| pos(i) < pos(j)) {
            count += 1;
        }
    });
    count
}

fn permute(p: &mut Vec<usize>, i: usize, f: &mut dyn FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}
