mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

use common::*;
use ptawit::dbm::{Dbm, Valuation};
use ptawit::farkas::{build_system, induce_subsystem, max_polytope, min_polytope};
use ptawit::milp::{pareto_enumerate, solve_lp, LinearProgram, Relation, Status};
use ptawit::minwit::{minimize_inv, minimize_loc, Options};
use ptawit::model::{
    inv_le, is_strong_subsystem, is_subsystem, loc_le, vol_le, Direction, Pta, Strength,
};
use ptawit::numeric::{bound_add, Bound, BoundValue, Rational, Strictness};
use ptawit::parser::{parse, serialize};
use ptawit::quotient::{build_quotient, QuotientMdp};
use ptawit::reach::{pta_probability, reach_prob, verify_subsystem};
use ptawit::region::ClockRegion;
use ptawit::volume::dbm_volume;

fn bound() -> impl Strategy<Value = Bound> {
    prop_oneof![
        (-20i64..20, any::<bool>()).prop_map(|(a, s)| if s { Bound::lt(a) } else { Bound::le(a) }),
        Just(Bound::INF),
    ]
}

fn rational() -> impl Strategy<Value = Rational> {
    (any::<i64>(), 1i64..i64::MAX).prop_map(|(p, q)| Rational::new(p, q))
}

/// Fixed RNG seed so every run draws the same cases.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x5eed), ..ProptestConfig::default() }
}

fn init_value(m: &QuotientMdp, dir: Direction) -> Rational {
    reach_prob(m, dir).unwrap().values[m.initial].clone()
}

proptest! {
    #![proptest_config(config(256))]
    #[test]
    fn bound_add_is_a_commutative_monoid(a in bound(), b in bound(), c in bound()) {
        let zero = Bound::le(0);
        prop_assert_eq!(bound_add(a, zero).unwrap(), a);
        prop_assert_eq!(bound_add(a, b).unwrap(), bound_add(b, a).unwrap());
        let left = bound_add(bound_add(a, b).unwrap(), c).unwrap();
        let right = bound_add(a, bound_add(b, c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn bound_add_is_monotone(a in bound(), b in bound(), c in bound()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(bound_add(lo, c).unwrap() <= bound_add(hi, c).unwrap());
        prop_assert!(bound_add(c, lo).unwrap() <= bound_add(c, hi).unwrap());
    }

    #[test]
    fn bound_order_is_total(a in bound(), b in bound()) {
        prop_assert!(a <= b || b <= a);
        let strict = Bound::new(BoundValue::Fin(3), Strictness::Strict);
        prop_assert!(strict < Bound::le(3));
    }

    #[test]
    fn rational_text_round_trip(r in rational()) {
        let back: Rational = r.to_string().parse().unwrap();
        prop_assert_eq!(&back, &r);
        let json = serde_json::to_string(&r).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), r);
    }

    #[test]
    fn rational_field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a);
        }
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn canonicalize_is_idempotent_and_preserves_points(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=3);
        let mut raw = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                if i != j && rng.gen_bool(0.5) {
                    raw.push((i, j, Bound::le(rng.gen_range(-3..=4))));
                }
            }
        }
        let m = Dbm::from_constraints(n, &raw);
        let c = m.canonicalize();
        prop_assert_eq!(c.canonicalize(), c.clone());
        for _ in 0..200 {
            let v = grid_point(&mut rng, n, 5, 4);
            prop_assert_eq!(m.satisfies(&v), c.satisfies(&v));
        }
    }

    #[test]
    fn zone_closure_is_canonical_and_monotone(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=3);
        let m = random_dbm(&mut rng, n, 3);
        let n2 = random_dbm(&mut rng, n, 3);
        let j = m.zone_closure(&n2).unwrap();
        prop_assert_eq!(j.canonicalize(), j.clone());
        prop_assert!(j.includes(&m).unwrap() && j.includes(&n2).unwrap());
        let sm = m.intersect(&random_dbm(&mut rng, n, 3)).unwrap().canonicalize();
        let sn = n2.intersect(&random_dbm(&mut rng, n, 3)).unwrap().canonicalize();
        prop_assert!(j.includes(&sm.zone_closure(&sn).unwrap()).unwrap());
    }

    #[test]
    fn volume_is_monotone_and_superadditive(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=3);
        let m = random_bounded_dbm(&mut rng, n, k);
        let sub = m.intersect(&random_dbm(&mut rng, n, k)).unwrap().canonicalize();
        let vm = dbm_volume(&m, k).unwrap().value;
        prop_assert!(dbm_volume(&sub, k).unwrap().value <= vm);
        let other = random_bounded_dbm(&mut rng, n, k);
        if m.intersect(&other).unwrap().canonicalize().is_empty() {
            let joined = m.zone_closure(&other).unwrap();
            let parts = &vm + &dbm_volume(&other, k).unwrap().value;
            prop_assert!(dbm_volume(&joined, k).unwrap().value >= parts);
        }
    }
}

/// Smallest zone containing every region whose representative lies in one of `zones`.
fn region_union_oracle(n: usize, k: i64, zones: &[&Dbm]) -> Dbm {
    let dim = n + 1;
    let mut cells = vec![Bound::NEG_INF; dim * dim];
    for r in ClockRegion::enumerate_bounded(n, k) {
        let v = r.representative();
        if !zones.iter().any(|z| z.satisfies(&v)) {
            continue;
        }
        for i in 0..dim {
            for j in 0..dim {
                let d = v.get(i) - v.get(j);
                let b = if d.is_integer() { Bound::le(d.floor_i64()) } else { Bound::lt(d.floor_i64() + 1) };
                cells[i * dim + j] = cells[i * dim + j].max(b);
            }
        }
    }
    Dbm::from_matrix(n, cells)
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn zone_closure_matches_region_union(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=if n == 3 { 2 } else { 4 });
        let a = random_bounded_dbm(&mut rng, n, k);
        let b = random_bounded_dbm(&mut rng, n, k);
        prop_assert_eq!(a.zone_closure(&b).unwrap(), region_union_oracle(n, k, &[&a, &b]));
    }

    #[test]
    fn parse_serialize_round_trip(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let text = random_pta_text(&mut rng, 4, 3, 3);
        if let Ok(t) = parse(&text) {
            let again = parse(&serialize(&t)).unwrap();
            prop_assert_eq!(&again, &t);
            prop_assert_eq!(serialize(&again), serialize(&t));
        }
    }

    #[test]
    fn subsystem_relation_is_reflexive_and_transitive(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (t, m) = random_pta(&mut rng, 4, 2, 2);
        prop_assert!(is_subsystem(&t, &t).is_ok());
        prop_assert!(is_strong_subsystem(&t, &t).is_ok());
        let a = induce_subsystem(&t, &m, &random_region_set(&mut rng, &m), Strength::Weak).unwrap().subsystem;
        prop_assert!(is_subsystem(&t, &a).is_ok());
        for _ in 0..4 {
            let b = random_pruning(&mut rng, &a);
            if is_subsystem(&a, &b).is_ok() {
                prop_assert!(is_subsystem(&t, &b).is_ok());
            }
        }
    }

    #[test]
    fn action_distributions_sum_to_one(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (_, m) = random_pta(&mut rng, 4, 2, 2);
        for cs in &m.choices {
            for c in cs {
                let total: Rational = c.dist.iter().map(|(_, p)| p.clone()).sum();
                prop_assert!(total.is_one());
                prop_assert!(c.dist.iter().all(|(_, p)| p.is_positive()));
            }
        }
    }

    #[test]
    fn reach_values_lie_in_value_iteration_bracket(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (_, m) = random_pta(&mut rng, 3, 2, 2);
        for dir in [Direction::Min, Direction::Max] {
            let exact = reach_prob(&m, dir).unwrap().values;
            let pick = |a: Rational, b: Rational| match dir {
                Direction::Min => a.min(b),
                Direction::Max => a.max(b),
            };
            let step = |x: &[Rational]| -> Vec<Rational> {
                (0..m.len())
                    .map(|s| {
                        if s == m.goal {
                            return Rational::one();
                        }
                        if s == m.fail {
                            return Rational::zero();
                        }
                        m.choices[s]
                            .iter()
                            .map(|c| c.dist.iter().map(|(d, p)| p * &x[*d]).sum::<Rational>())
                            .reduce(&pick)
                            .unwrap_or_else(Rational::zero)
                    })
                    .collect()
            };
            let mut lo: Vec<Rational> = (0..m.len()).map(|s| if s == m.goal { Rational::one() } else { Rational::zero() }).collect();
            let mut hi: Vec<Rational> = (0..m.len()).map(|s| if s == m.fail { Rational::zero() } else { Rational::one() }).collect();
            for _ in 0..200 {
                lo = step(&lo);
                hi = step(&hi);
            }
            for s in 0..m.len() {
                prop_assert!(lo[s] <= exact[s] && exact[s] <= hi[s], "state {s}: {} <= {} <= {}", lo[s], exact[s], hi[s]);
            }
        }
    }

    #[test]
    fn farkas_polytope_nonempty_iff_threshold_reachable(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (_, m) = random_pta(&mut rng, 4, 2, 2);
        let f = build_system(&m).unwrap();
        for dir in [Direction::Min, Direction::Max] {
            let p = init_value(&m, dir);
            for lambda in [p.clone(), &p + &Rational::new(1, 100), &p * &Rational::new(1, 2)] {
                let lp = match dir {
                    Direction::Min => min_polytope(&f, &lambda),
                    Direction::Max => max_polytope(&f, &lambda),
                };
                let feasible = solve_lp(&lp).status == Status::Optimal;
                prop_assert_eq!(feasible, lambda <= p, "{} lambda {} vs {}", dir, lambda, p);
            }
        }
    }

    #[test]
    fn inv_order_refines_loc_and_vol(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (t, m) = random_pta(&mut rng, 4, 2, 2);
        let mut subs: Vec<Pta> = vec![t.clone()];
        for _ in 0..4 {
            subs.push(random_pruning(&mut rng, &t));
            subs.push(induce_subsystem(&t, &m, &random_region_set(&mut rng, &m), Strength::Strong).unwrap().subsystem);
        }
        for a in &subs {
            for b in &subs {
                if inv_le(a, b) {
                    prop_assert!(loc_le(a, b) && vol_le(a, b));
                }
            }
        }
    }
}

/// `T` restricted to `keep` (plus goal and fail) with all other mass sent to fail.
fn restrict(t: &Pta, keep: &BTreeSet<usize>) -> Pta {
    let names: std::collections::BTreeMap<String, Dbm> = keep
        .iter()
        .map(|&l| (t.locations[l].name.clone(), t.locations[l].invariant.dbm().canonicalize()))
        .collect();
    let mut sub = t.clone();
    let index: Vec<Option<usize>> = {
        let mut next = 0;
        (0..t.locations.len())
            .map(|l| {
                (t.is_absorbing(l) || names.contains_key(&t.locations[l].name)).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let fail = index[t.fail].unwrap();
    sub.locations = Vec::new();
    for (l, loc) in t.locations.iter().enumerate() {
        if index[l].is_none() {
            continue;
        }
        let mut nl = loc.clone();
        for tr in &mut nl.transitions {
            let mut merged: Vec<ptawit::model::Branch> = Vec::new();
            for b in &tr.branches {
                let (target, resets) = match index[b.target] {
                    Some(i) => (i, b.resets.clone()),
                    None => (fail, Vec::new()),
                };
                match merged.iter_mut().find(|x| x.target == target && x.resets == resets) {
                    Some(x) => x.prob += &b.prob,
                    None => merged.push(ptawit::model::Branch { prob: b.prob.clone(), resets, target }),
                }
            }
            tr.branches = merged;
        }
        sub.locations.push(nl);
    }
    sub.initial = index[t.initial].unwrap();
    sub.goal = index[t.goal].unwrap();
    sub.fail = fail;
    sub
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn loc_optimum_matches_subset_enumeration(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (t, m) = random_pta(&mut rng, 4, 2, 2);
        if m.is_target(m.initial) {
            return Ok(());
        }
        let ordinary: Vec<usize> = (0..t.locations.len()).filter(|&l| !t.is_absorbing(l) && l != t.initial).collect();
        for dir in [Direction::Min, Direction::Max] {
            let p = init_value(&m, dir);
            let lambda = &p * &Rational::new(rng.gen_range(1..=4), 4);
            if lambda.is_zero() {
                continue;
            }
            let mut best: Option<usize> = None;
            for mask in 0u32..(1 << ordinary.len()) {
                let mut keep: BTreeSet<usize> =
                    ordinary.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &l)| l).collect();
                keep.insert(t.initial);
                let sub = restrict(&t, &keep);
                let k = t.clamp().max(sub.max_constant());
                let Ok(v) = pta_probability(&sub, k, dir) else { continue };
                if v >= lambda {
                    best = Some(best.map_or(keep.len(), |b| b.min(keep.len())));
                }
            }
            let r = minimize_loc(&t, &m, &lambda, dir, Options::default()).unwrap();
            let expect = best.map(Rational::from);
            prop_assert_eq!(Some(r.optimum.clone()), expect, "{} at lambda {}", dir, lambda);
            for c in &r.witnesses {
                prop_assert!(verify_subsystem(&t, &c.witness.subsystem, dir, &lambda).unwrap().passed);
            }
        }
    }

    #[test]
    fn inv_witnesses_verify(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (t, m) = random_pta(&mut rng, 3, 2, 2);
        // Larger quotients make the exact INV MILP too slow for a debug build.
        prop_assume!(m.len() <= 24);
        for dir in [Direction::Min, Direction::Max] {
            let lambda = &init_value(&m, dir) * &Rational::new(rng.gen_range(1..=4), 4);
            let r = minimize_inv(&t, &m, &lambda, dir).unwrap();
            for c in &r.witnesses {
                prop_assert!(verify_subsystem(&t, &c.witness.subsystem, dir, &lambda).unwrap().passed);
            }
        }
    }

    #[test]
    fn pareto_frontier_is_complete_and_non_dominated(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(2..=6);
        let mut lp = LinearProgram::new();
        for i in 0..n {
            lp.add_binary(format!("b{i}"));
        }
        for _ in 0..rng.gen_range(1..=3) {
            let coeffs = (0..n).map(|j| (j, Rational::from_integer(rng.gen_range(0..=3)))).collect();
            lp.add_row(coeffs, Relation::Ge, Rational::from_integer(rng.gen_range(1..=4)));
        }
        lp.objectives = (0..2)
            .map(|_| (0..n).map(|j| (j, Rational::from_integer(rng.gen_range(0..=3)))).collect())
            .collect();
        let eval = |x: &[Rational]| -> Vec<Rational> {
            lp.objectives.iter().map(|o| o.iter().map(|(j, c)| c * &x[*j]).sum()).collect()
        };
        let frontier: Vec<Vec<Rational>> = pareto_enumerate(&lp).iter().map(|s| eval(&s.values)).collect();
        let dominates = |a: &[Rational], b: &[Rational]| a.iter().zip(b).all(|(x, y)| x <= y) && a != b;
        for a in &frontier {
            for b in &frontier {
                prop_assert!(!dominates(a, b));
            }
        }
        for mask in 0u32..(1 << n) {
            let x: Vec<Rational> = (0..n).map(|j| Rational::from_integer(((mask >> j) & 1) as i64)).collect();
            if !lp.is_feasible(&x) {
                continue;
            }
            let p = eval(&x);
            prop_assert!(frontier.iter().any(|f| f.iter().zip(&p).all(|(a, b)| a <= b)), "{:?} not covered", p);
        }
    }
}

/// Classical region key: clamped integer parts, zero-fraction flags and the
/// order of fractional parts among clocks at most `k`.
fn classical_key(v: &Valuation, k: i64) -> (Vec<i64>, Vec<bool>, Vec<std::cmp::Ordering>) {
    let n = v.clocks();
    let kk = Rational::from_integer(k);
    let small: Vec<usize> = (1..=n).filter(|&i| v.get(i) <= &kk).collect();
    let ints = (1..=n).map(|i| if v.get(i) > &kk { k + 1 } else { v.get(i).floor_i64() }).collect();
    let frac = |i: usize| v.get(i) - &Rational::from_integer(v.get(i).floor_i64());
    let zero = small.iter().map(|&i| v.get(i).is_integer()).collect();
    let order = small
        .iter()
        .flat_map(|&i| small.iter().map(move |&j| (i, j)))
        .map(|(i, j)| frac(i).cmp(&frac(j)))
        .collect();
    (ints, zero, order)
}

#[test]
fn region_count_matches_closed_form() {
    for n in 1..=2usize {
        for k in 1..=3i64 {
            let names = &CLOCK_NAMES[..n];
            let mut text = format!("clocks {};\nbound {k};\nloc l0 init;\nloc goal goal;\nloc fail fail;\n", names.join(" "));
            for c in names {
                text.push_str(&format!("trans l0 act r{c} {{ 1 -> reset{{{c}}} l0; }};\n"));
            }
            let t = parse(&text).unwrap();
            let m = build_quotient(&t, k).unwrap();
            let states = m.region_states();
            let refined = match n {
                1 => 2 * k + 2,
                _ => 10 * k * k + 16 * k + 6,
            };
            assert_eq!(states.len() as i64, refined, "n = {n}, K = {k}");
            let classical: BTreeSet<_> =
                states.iter().map(|&s| classical_key(&m.region(s).unwrap().representative(), k)).collect();
            let per_clock = 2 * k + 2;
            let alur_dill = match n {
                1 => per_clock,
                _ => per_clock * per_clock + 2 * k * k,
            };
            assert_eq!(classical.len() as i64, alur_dill, "n = {n}, K = {k}");
            let bounded = ClockRegion::enumerate_bounded(n, k).len() as i64;
            let expected_bounded = match n {
                1 => 2 * k + 1,
                _ => (2 * k + 1) * (2 * k + 1) + 2 * k * k,
            };
            assert_eq!(bounded, expected_bounded);
        }
    }
}

#[test]
fn fixture_witnesses_never_exceed_the_original() {
    let t = fig1();
    let lambda = q("6/25");
    for (file, dir) in [("fig1b.pta", Direction::Max), ("table1-min-loc.pta", Direction::Min), ("table1-min-loc.pta", Direction::Max)] {
        let sub = parse(&fixture(file)).unwrap();
        let original = pta_probability(&t, t.clamp(), dir).unwrap();
        let v = verify_subsystem(&t, &sub, dir, &lambda).unwrap();
        assert!(v.probability.unwrap() <= original, "{file} {dir}");
    }
}

#[test]
fn strong_check_names_the_shrunk_guard() {
    let t = fig1();
    assert!(is_strong_subsystem(&t, &t).is_ok());
    let sub = parse(&fixture("fig1b.pta")).unwrap();
    assert!(is_subsystem(&t, &sub).is_ok());
    let e = is_strong_subsystem(&t, &sub).unwrap_err();
    assert_eq!(e.to_string(), "guard of alpha at l1 shrunk more than allowed");
}
