mod common;

use common::*;
use contperc::connfn::{mean_degree, penrose_lower_bound};
use contperc::ConnectionFunction;
use proptest::prelude::*;
use rand::Rng;

const EXACT: f64 = 1e-12;

/// `∫ r f(r) dr` summed from the step representation.
fn moment_oracle(f: &ConnectionFunction) -> f64 {
    let (b, v) = f.canonical_steps();
    let mut prev = 0.0;
    let mut s = 0.0;
    for (b, v) in b.iter().zip(&v) {
        s += v * (b * b - prev * prev) / 2.0;
        prev = *b;
    }
    s
}

#[test]
fn spread_composes_over_random_step_functions() {
    let mut rng = test_rng(10);
    for k in 0..100 {
        let f = random_steps(&mut rng, 3.0);
        let q = rng.random_range(0.05..=1.0);
        let p = q * rng.random_range(0.05..=1.0);
        let lhs = f.spread(q).unwrap().spread(p / q).unwrap();
        let rhs = f.spread(p).unwrap();
        assert!(lhs.approx_eq(&rhs, EXACT), "case {k}: {} vs {}", lhs.describe(), rhs.describe());
        // Pointwise too: S_p f(r) = p f(√p r).
        for i in 0..50 {
            let r = 4.0 * i as f64 / 50.0 / p.sqrt();
            let want = p * brute_value(&f, p.sqrt() * r);
            assert!((brute_value(&rhs, r) - want).abs() <= EXACT || near_break(&f, p.sqrt() * r));
        }
    }
}

// Right-closed steps make evaluation exactly at a break sensitive to the
// last ulp of the rescaled break.
fn near_break(f: &ConnectionFunction, r: f64) -> bool {
    f.canonical_steps().0.iter().any(|b| (b - r).abs() < 1e-9)
}

#[test]
fn spread_preserves_first_moment_over_random_step_functions() {
    let mut rng = test_rng(11);
    for k in 0..100 {
        let f = random_steps(&mut rng, 3.0);
        let p = rng.random_range(0.01..=1.0);
        let s = f.spread(p).unwrap();
        assert!((s.first_moment() - f.first_moment()).abs() <= EXACT, "case {k}");
        assert!((f.first_moment() - moment_oracle(&f)).abs() <= EXACT, "case {k}");
    }
}

#[test]
fn squash_scales_first_moment_over_random_step_functions() {
    let mut rng = test_rng(12);
    for k in 0..100 {
        let f = random_steps(&mut rng, 3.0);
        let q = rng.random_range(0.01..=1.0);
        let s = f.squash(q).unwrap();
        assert!((s.first_moment() - q * f.first_moment()).abs() <= EXACT, "case {k}");
    }
}

#[test]
fn penrose_bound_invariant_under_spread() {
    let g = ConnectionFunction::indicator(1.0).unwrap();
    for p in [1.0, 0.5, 0.25, 0.1, 0.01] {
        let b = penrose_lower_bound(&g.spread(p).unwrap()).unwrap();
        assert!((b - 1.0 / std::f64::consts::PI).abs() < EXACT);
    }
}

fn arb_steps() -> impl Strategy<Value = ConnectionFunction> {
    (1usize..6)
        .prop_flat_map(|k| (prop::collection::vec(0.01f64..3.0, k), prop::collection::vec(0.01f64..=1.0, k)))
        .prop_filter_map("distinct breaks", |(mut b, mut v)| {
            b.sort_by(f64::total_cmp);
            b.dedup();
            v.truncate(b.len());
            v.sort_by(|x, y| y.total_cmp(x));
            ConnectionFunction::steps(b, v).ok()
        })
}

proptest! {
    #[test]
    fn transforms_stay_valid_and_nonincreasing(f in arb_steps(), p in 0.001f64..=1.0, q in 0.001f64..=1.0) {
        for g in [f.spread(p).unwrap(), f.squash(q).unwrap()] {
            let (b, v) = g.canonical_steps();
            prop_assert!(b.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(v.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(v.iter().all(|&x| x > 0.0 && x <= 1.0));
        }
    }

    #[test]
    fn spread_dominated_at_origin_and_support_grows(f in arb_steps(), p in 0.001f64..=1.0) {
        let s = f.spread(p).unwrap();
        prop_assert!(s.support_radius() >= f.support_radius() * (1.0 - 1e-12));
        prop_assert!(s.value(0.0) <= f.value(0.0) + EXACT);
    }

    #[test]
    fn squash_and_spread_commute(f in arb_steps(), p in 0.01f64..=1.0, q in 0.01f64..=1.0) {
        let a = f.squash(q).unwrap().spread(p).unwrap();
        let b = f.spread(p).unwrap().squash(q).unwrap();
        prop_assert!(a.approx_eq(&b, EXACT));
    }

    #[test]
    fn mean_degree_is_linear_in_intensity(f in arb_steps(), l in 0.0f64..10.0) {
        let one = mean_degree(1.0, &f).unwrap();
        prop_assert!((mean_degree(l, &f).unwrap() - l * one).abs() <= 1e-12 * (1.0 + l * one));
    }

    #[test]
    fn normalisation_round_trips(f in arb_steps()) {
        let (g, scale) = f.normalize_support();
        prop_assert!((g.support_radius() - 1.0).abs() < EXACT);
        prop_assert!((g.first_moment() * scale * scale - f.first_moment()).abs() < 1e-10);
    }

    #[test]
    fn json_round_trip(f in arb_steps()) {
        let text = serde_json::to_string(&f).unwrap();
        let back: ConnectionFunction = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }
}
