//! Invariants of fidelity, purified distance, partial trace and purification.

use oneshot_rsp::linalg::{self, c};
use oneshot_rsp::operators::{self, apply_isometry_channel, fidelity, purified_distance, purify, Side};
use oneshot_rsp::random::{any_state, haar_isometry, rng_for};
use oneshot_rsp::{BipartiteShape, DensityOperator};
use proptest::prelude::*;

fn states(seed: u64, dim: usize, count: usize) -> Vec<DensityOperator> {
    let mut rng = rng_for(seed, 0);
    (0..count).map(|_| any_state(&mut rng, dim)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fidelity_triangle_type_inequality(seed in any::<u64>(), dim in 2usize..=3) {
        let s = states(seed, dim, 3);
        let (r, q, x) = (&s[0], &s[1], &s[2]);
        let lhs = fidelity(r, x).unwrap().powi(2) + fidelity(q, x).unwrap().powi(2);
        prop_assert!(lhs <= 1.0 + fidelity(r, q).unwrap() + 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fidelity_with_subnormalized_is_bounded_by_trace(seed in any::<u64>(), scale in 0.0f64..=1.0) {
        let s = states(seed, 3, 2);
        let sub = DensityOperator::subnormalized(s[1].matrix() * c(scale)).unwrap();
        let f = fidelity(&s[0], &sub).unwrap();
        prop_assert!(f * f <= sub.trace() + 1e-9);
    }

    #[test]
    fn channels_do_not_decrease_fidelity(seed in any::<u64>(), env in 1usize..=3) {
        let s = states(seed, 2, 2);
        let mut rng = rng_for(seed, 1);
        let v = haar_isometry(&mut rng, 3 * env, 2);
        let a = apply_isometry_channel(&s[0], &v, 3).unwrap();
        let b = apply_isometry_channel(&s[1], &v, 3).unwrap();
        prop_assert!(fidelity(&a, &b).unwrap() >= fidelity(&s[0], &s[1]).unwrap() - 1e-8);
        prop_assert!(purified_distance(&a, &b).unwrap() <= purified_distance(&s[0], &s[1]).unwrap() + 1e-8);
    }

    #[test]
    fn purified_distance_is_a_metric(seed in any::<u64>(), dim in 2usize..=3) {
        let s = states(seed, dim, 3);
        let d = |i: usize, j: usize| purified_distance(&s[i], &s[j]).unwrap();
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-8);
        prop_assert!(d(0, 0) <= 1e-6);
    }

    #[test]
    fn purification_round_trips(seed in any::<u64>(), dim in 1usize..=4) {
        let rho = states(seed, dim, 1).pop().unwrap();
        let psi = purify(&rho).unwrap();
        let back = operators::partial_trace(&psi.density(), BipartiteShape::new(dim, dim), Side::A).unwrap();
        prop_assert!(linalg::max_abs_diff(back.matrix(), rho.matrix()) <= 1e-9);
    }

    #[test]
    fn partial_trace_matches_index_sums(seed in any::<u64>()) {
        let rho = states(seed, 4, 1).pop().unwrap();
        let m = rho.matrix();
        let got = operators::partial_trace(&rho, BipartiteShape::new(2, 2), Side::B).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let direct = m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)];
                prop_assert!((got.matrix()[(i, j)] - direct).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn uhlmann_extension_preserves_fidelity(seed in any::<u64>()) {
        let s = states(seed, 4, 1);
        let mut rng = rng_for(seed, 2);
        let target = any_state(&mut rng, 2);
        let shape = BipartiteShape::new(2, 2);
        let ext = operators::uhlmann_extension(&s[0], shape, &target).unwrap();
        let marg = operators::partial_trace(&ext, shape, Side::B).unwrap();
        let rho_a = operators::partial_trace(&s[0], shape, Side::B).unwrap();
        prop_assert!(linalg::max_abs_diff(marg.matrix(), target.matrix()) <= 1e-7);
        let lhs = fidelity(&ext, &s[0]).unwrap();
        let rhs = fidelity(&target, &rho_a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-7);
    }
}
