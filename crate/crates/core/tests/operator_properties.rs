mod common;

use common::{cocoercive_catalog, monotone_catalog};
use fbb_core::operators::{certify_cocoercive, certify_fne, polarization_gap, resolvent_eval, MonotoneKind};
use fbb_core::Point;
use proptest::prelude::*;

fn point_strategy(d: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-20.0f64..20.0, d).prop_map(Point::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// y = J(v) implies (v − y)/γ ∈ A y.
    #[test]
    fn resolvent_identity_holds_for_every_kind(
        d in 1usize..7,
        seed in any::<u64>(),
        gamma in 1e-3f64..=10.0,
        raw in prop::collection::vec(-20.0f64..20.0, 6),
    ) {
        let v = Point::from_vec(raw[..d].to_vec());
        for op in monotone_catalog(d, seed) {
            let y = resolvent_eval(&op, gamma, &v).unwrap();
            let u = &(&v - &y) * (1.0 / gamma);
            prop_assert!(
                op.graph_member(&y, &u, 1e-8).unwrap(),
                "kind {} gamma {gamma}: ({:?}, {:?}) not in graph", op.kind().name(), y, u
            );
        }
    }

    /// Projections are idempotent.
    #[test]
    fn normal_cone_resolvents_are_idempotent(seed in any::<u64>(), gamma in 1e-3f64..=10.0, v in point_strategy(5)) {
        for op in monotone_catalog(5, seed) {
            if !matches!(
                op.kind(),
                MonotoneKind::NormalConeBox { .. } | MonotoneKind::NormalConeAffine { .. } | MonotoneKind::NormalConeSingleton { .. }
            ) {
                continue;
            }
            let once = resolvent_eval(&op, gamma, &v).unwrap();
            let twice = resolvent_eval(&op, gamma, &once).unwrap();
            prop_assert!(once.max_abs_diff(&twice) <= 1e-12 * (1.0 + once.amax()));
        }
    }

    #[test]
    fn polarization_identity(x in point_strategy(4), y in point_strategy(4), z in point_strategy(4), w in point_strategy(4)) {
        let scale = 1.0 + x.norm_sq() + y.norm_sq() + z.norm_sq() + w.norm_sq();
        prop_assert!(polarization_gap(&x, &y, &z, &w).abs() <= 1e-10 * scale);
    }
}

#[test]
fn every_resolvent_is_firmly_nonexpansive() {
    for d in [1usize, 3, 8] {
        for op in monotone_catalog(d, 17 + d as u64) {
            for gamma in [0.05, 1.0, 6.0] {
                let r = certify_fne(&op, gamma, 1000, 42).unwrap();
                assert!(r.passed, "{} d={d} γ={gamma}: {:?}", op.kind().name(), r);
            }
        }
    }
}

#[test]
fn zero_resolvent_violation_is_exactly_zero() {
    let op = &monotone_catalog(4, 0)[0];
    assert_eq!(certify_fne(op, 3.3, 1000, 7).unwrap().max_violation, 0.0);
}

#[test]
fn l1_and_box_fne_with_thousand_samples() {
    let ops = monotone_catalog(6, 3);
    for op in &ops[1..3] {
        let r = certify_fne(op, 1.0, 1000, 99).unwrap();
        assert!(r.max_violation <= 1e-10, "{}: {}", op.kind().name(), r.max_violation);
    }
}

#[test]
fn every_cocoercive_kind_respects_declared_beta() {
    for d in [1usize, 4, 10] {
        for op in cocoercive_catalog(d, 5 + d as u64) {
            let r = certify_cocoercive(&op, 1000, 8).unwrap();
            assert!(r.passed, "{} d={d}: {:?}", op.kind().name(), r);
        }
    }
}

#[test]
fn reports_echo_seed() {
    let op = &cocoercive_catalog(2, 1)[2];
    let r = certify_cocoercive(op, 10, 123_456).unwrap();
    assert_eq!(r.seed, 123_456);
    assert_eq!(r.n_samples, 10);
    assert_eq!(r, certify_cocoercive(op, 10, 123_456).unwrap());
}
