//! Invariants of the entropic quantities and of hypothesis testing.

use oneshot_rsp::divergences::{self, Ensemble};
use oneshot_rsp::hypothesis::{beta_eps, beta_eps_sdp};
use oneshot_rsp::operators::apply_isometry_channel;
use oneshot_rsp::random::{any_state, full_rank_state, haar_isometry, probability_vector, rng_for};
use oneshot_rsp::DensityOperator;
use proptest::prelude::*;

fn pair(seed: u64, dim: usize) -> (DensityOperator, DensityOperator) {
    let mut rng = rng_for(seed, 0);
    (any_state(&mut rng, dim), full_rank_state(&mut rng, dim))
}

fn ensemble(seed: u64, dim: usize, n: usize) -> Ensemble {
    let mut rng = rng_for(seed, 0);
    let states = (0..n).map(|_| any_state(&mut rng, dim)).collect();
    Ensemble::weighted(states, probability_vector(&mut rng, n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dmax_dominates_relative_entropy(seed in any::<u64>(), dim in 2usize..=3) {
        let (r, s) = pair(seed, dim);
        let rel = divergences::relative_entropy(&r, &s).unwrap();
        prop_assert!(rel >= -1e-8);
        prop_assert!(divergences::d_max(&r, &s).unwrap() >= rel - 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn holevo_is_the_cq_mutual_information(seed in any::<u64>(), n in 1usize..=4) {
        let e = ensemble(seed, 2, n);
        let cq = e.cq_state().unwrap();
        let mi = divergences::mutual_information(&cq.to_density().unwrap(), cq.shape()).unwrap();
        prop_assert!((divergences::holevo(&e).unwrap() - mi).abs() <= 1e-8);
    }

    #[test]
    fn observational_divergence_below_dmax(seed in any::<u64>()) {
        let (r, s) = pair(seed, 2);
        let obs = divergences::d_obs(&r, &s, 100).unwrap();
        prop_assert!(obs <= divergences::d_max(&r, &s).unwrap() + 1e-3);
    }

    #[test]
    fn max_information_dominates_holevo(seed in any::<u64>(), n in 1usize..=4) {
        let e = ensemble(seed, 2, n);
        let t = divergences::t_of_q(&e, 1e-10, 10_000).unwrap();
        prop_assert!(t.value >= divergences::holevo(&e).unwrap() - 1e-8);
    }

    #[test]
    fn beta_obeys_data_processing(seed in any::<u64>(), eps in 0.0f64..0.95) {
        let (r, s) = pair(seed, 2);
        let mut rng = rng_for(seed, 1);
        let v = haar_isometry(&mut rng, 6, 2);
        let (pr, ps) = (apply_isometry_channel(&r, &v, 3).unwrap(), apply_isometry_channel(&s, &v, 3).unwrap());
        prop_assert!(beta_eps(&r, &s, eps).unwrap().0 <= beta_eps(&pr, &ps, eps).unwrap().0 + 1e-8);
    }

    #[test]
    fn beta_is_monotone_and_in_range(seed in any::<u64>(), e1 in 0.0f64..0.95, e2 in 0.0f64..0.95) {
        let (r, s) = pair(seed, 3);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (b_lo, t) = beta_eps(&r, &s, lo).unwrap();
        let (b_hi, _) = beta_eps(&r, &s, hi).unwrap();
        prop_assert!(b_hi <= b_lo + 1e-10);
        prop_assert!((0.0..=1.0 - lo + 1e-9).contains(&b_lo));
        prop_assert!(t.alpha >= 1.0 - lo - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn bisection_matches_sdp(seed in any::<u64>(), dim in 2usize..=3, eps in 0.0f64..0.9) {
        let mut rng = rng_for(seed, 0);
        let (r, s) = (any_state(&mut rng, dim), any_state(&mut rng, dim));
        let a = beta_eps(&r, &s, eps).unwrap().0;
        let b = beta_eps_sdp(&r, &s, eps).unwrap();
        prop_assert!((a - b).abs() <= 1e-6, "{} vs {}", a, b);
    }
}
