//! Invariants of the smoothed entropic quantities.

use oneshot_rsp::divergences::{self, Ensemble};
use oneshot_rsp::linalg::{self, c};
use oneshot_rsp::operators::{partial_trace, Side};
use oneshot_rsp::random::{any_state, full_rank_state, haar_pure, haar_vector, probability_vector, rng_for};
use oneshot_rsp::smoothing::{min_max_radius, smooth_d_max, smooth_i_max_general};
use oneshot_rsp::{BipartiteShape, DensityOperator};
use proptest::prelude::*;

fn pair(seed: u64, dim: usize) -> (DensityOperator, DensityOperator) {
    let mut rng = rng_for(seed, 0);
    (any_state(&mut rng, dim), full_rank_state(&mut rng, dim))
}

/// `Σ_m p_m ρ_m ⊗ |m⟩⟨m|` on `A ⊗ B ⊗ M` with the register last.
fn classical_register(seed: u64, dims: usize) -> DensityOperator {
    let mut rng = rng_for(seed, 0);
    let p = probability_vector(&mut rng, 2);
    let mut m = oneshot_rsp::linalg::CMat::zeros(dims * 2, dims * 2);
    for (k, pk) in p.iter().enumerate() {
        let block = any_state(&mut rng, dims);
        m += linalg::kron(block.matrix(), DensityOperator::basis(2, k).matrix()) * c(*pk);
    }
    DensityOperator::new(linalg::hermitize(&m)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn smooth_dmax_is_nonincreasing_in_eps(seed in any::<u64>(), e1 in 0.0f64..0.8, e2 in 0.0f64..0.8) {
        let (r, s) = pair(seed, 2);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = smooth_d_max(&r, &s, lo).unwrap();
        let b = smooth_d_max(&r, &s, hi).unwrap();
        prop_assert!(b <= a + 1e-5, "{} at {} vs {} at {}", b, hi, a, lo);
    }

    #[test]
    fn smooth_dmax_is_below_dmax(seed in any::<u64>(), eps in 0.0f64..0.9, dim in 2usize..=3) {
        let (r, s) = pair(seed, dim);
        let dmax = divergences::d_max(&r, &s).unwrap();
        prop_assert_eq!(smooth_d_max(&r, &s, 0.0).unwrap(), dmax);
        prop_assert!(smooth_d_max(&r, &s, eps).unwrap() <= dmax + 1e-6);
    }

    #[test]
    fn smooth_dmax_is_below_the_substate_bound(seed in any::<u64>(), eps in 0.1f64..0.9) {
        let (r, s) = pair(seed, 2);
        let sm = smooth_d_max(&r, &s, eps).unwrap();
        prop_assert!(sm <= divergences::substate_bound(&r, &s, eps).unwrap() + 1e-4);
    }

    #[test]
    fn two_pure_states_need_one_plus_trace_distance(seed in any::<u64>(), dim in 2usize..=3) {
        let mut rng = rng_for(seed, 0);
        let (a, b) = (haar_vector(&mut rng, dim), haar_vector(&mut rng, dim));
        let overlap = a.amplitudes().dotc(b.amplitudes()).norm();
        let e = Ensemble::from_states(vec![a.density(), b.density()]).unwrap();
        let got = min_max_radius(&e, 0.0).unwrap().value;
        let trace_distance = (1.0 - overlap * overlap).max(0.0).sqrt();
        prop_assert!((got - (1.0 + trace_distance).log2()).abs() <= 1e-6, "{} vs overlap {}", got, overlap);
    }

    #[test]
    fn min_max_radius_is_nonincreasing_in_delta(seed in any::<u64>(), n in 2usize..=4, delta in 0.05f64..0.9) {
        let mut rng = rng_for(seed, 0);
        let e = Ensemble::from_states((0..n).map(|_| haar_pure(&mut rng, 2)).collect()).unwrap();
        let at0 = min_max_radius(&e, 0.0).unwrap().value;
        let at = min_max_radius(&e, delta).unwrap().value;
        prop_assert!(at <= at0 + 1e-5);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&at0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn classical_register_costs_at_most_its_size(seed in any::<u64>()) {
        let rho = classical_register(seed, 4);
        let with_m = divergences::i_max(&rho, BipartiteShape::new(2, 4)).unwrap();
        let without = partial_trace(&rho, BipartiteShape::new(4, 2), Side::B).unwrap();
        let base = divergences::i_max(&without, BipartiteShape::new(2, 2)).unwrap();
        prop_assert!(base <= with_m + 1e-7);
        prop_assert!(with_m <= base + 1.0 + 1e-7);
    }

    #[test]
    fn quantum_register_costs_at_most_twice_its_size(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let rho = any_state(&mut rng, 8);
        let with_m = divergences::i_max(&rho, BipartiteShape::new(2, 4)).unwrap();
        let without = partial_trace(&rho, BipartiteShape::new(4, 2), Side::B).unwrap();
        let base = divergences::i_max(&without, BipartiteShape::new(2, 2)).unwrap();
        prop_assert!(base <= with_m + 1e-7);
        prop_assert!(with_m <= base + 2.0 + 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn smooth_max_information_obeys_data_processing(seed in any::<u64>(), eps in 0.1f64..0.5) {
        let rho = classical_register(seed, 4);
        let with_m = smooth_i_max_general(&rho, BipartiteShape::new(2, 4), eps).unwrap();
        let without = partial_trace(&rho, BipartiteShape::new(4, 2), Side::B).unwrap();
        let base = smooth_i_max_general(&without, BipartiteShape::new(2, 2), eps).unwrap();
        prop_assert!(base <= with_m + 1e-5, "{} vs {}", base, with_m);
        prop_assert!(with_m <= divergences::i_max(&rho, BipartiteShape::new(2, 4)).unwrap() + 1e-5);
    }
}
