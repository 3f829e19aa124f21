//! Invariants of the testing game, the rejection-sampling protocol, the
//! LOCC bit-transfer bound and ν-nets.

use oneshot_rsp::divergences::Ensemble;
use oneshot_rsp::linalg;
use oneshot_rsp::locc::{self, FuzzLimits, LoccProtocol, Party};
use oneshot_rsp::minimax;
use oneshot_rsp::nets::{self, NetOrder};
use oneshot_rsp::operators::purified_distance;
use oneshot_rsp::random::{any_state, full_rank_state, haar_pure, probability_vector, rng_for};
use oneshot_rsp::rsp::{self, ErrorMode};
use oneshot_rsp::DensityOperator;
use proptest::prelude::*;

fn weighted(seed: u64, dim: usize, n: usize) -> Ensemble {
    let mut rng = rng_for(seed, 0);
    let states = (0..n).map(|_| any_state(&mut rng, dim)).collect();
    Ensemble::weighted(states, probability_vector(&mut rng, n)).unwrap()
}

/// Targets `(1 − w)σ + w ψ`, which satisfy `σ_x ⪯ 2^λ σ` for `w ≤ min(1, (2^λ − 1) λ_min(σ))`.
fn dominated_targets(seed: u64, sigma: &DensityOperator, lambda: f64, n: usize) -> Vec<DensityOperator> {
    let mut rng = rng_for(seed, 1);
    let lmin = sigma.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    let w = (0.99 * (lambda.exp2() - 1.0) * lmin).min(1.0);
    (0..n)
        .map(|_| {
            let psi = haar_pure(&mut rng, sigma.dim());
            let m = sigma.matrix() * linalg::c(1.0 - w) + psi.matrix() * linalg::c(w);
            DensityOperator::new(linalg::hermitize(&m)).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn game_value_lies_between_the_best_responses(seed in any::<u64>(), n in 2usize..=3, lambda in 0.05f64..0.9) {
        let e = weighted(seed, 2, n);
        let s = minimax::solve_saddle(&e, lambda, minimax::DEFAULT_TOL, 50).unwrap();
        prop_assert!(s.value >= -1e-9 && s.value <= 1.0 - lambda + 1e-6);
        let (upper, _) = minimax::best_sigma(&e, lambda, &s.p_star).unwrap();
        let (lower, _) = minimax::best_p(&e, lambda, &s.sigma_star).unwrap();
        prop_assert!(lower <= s.value + 1e-5 && s.value <= upper + 1e-5);
        prop_assert!(upper - lower <= minimax::DEFAULT_TOL + 1e-9);
        let (max_min, _) = minimax::max_min_value(&e, lambda).unwrap();
        prop_assert!((max_min - s.value).abs() <= 1e-4, "max-min {} vs min-max {}", max_min, s.value);
    }

    #[test]
    fn protocol_errors_stay_within_eps(seed in any::<u64>(), n in 2usize..=3, eps in 0.2f64..0.6) {
        let e = weighted(seed, 2, n);
        let avg = rsp::avg_case_protocol(&e, eps).unwrap();
        prop_assert!(avg.within_error);
        prop_assert!(avg.outcome.achieved_error <= eps + rsp::ERROR_TOL);
        prop_assert_eq!(avg.cost_bits, rsp::cost_bits(avg.t));
        let worst = rsp::worst_case_protocol(&e, eps).unwrap();
        prop_assert!(worst.within_error);
        prop_assert!(worst.outcome.achieved_error <= eps + rsp::ERROR_TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_matches_simulation(seed in any::<u64>(), lambda in 0.0f64..2.0, t in 1usize..=3) {
        let mut rng = rng_for(seed, 0);
        let sigma = full_rank_state(&mut rng, 2);
        let targets = dominated_targets(seed, &sigma, lambda, 2);
        let inst = rsp::build_jrs(&targets, &sigma, lambda, t).unwrap();
        let closed = rsp::closed_form_outputs(&inst).unwrap();
        for (x, s) in closed.iter().enumerate() {
            let sim = rsp::simulate_copies(&inst, x).unwrap();
            prop_assert!(linalg::max_abs_diff(&sim, s.matrix()) <= 1e-8);
        }
        prop_assert!((inst.failure_probability() - (1.0 - (-lambda).exp2()).powi(t as i32)).abs() <= 1e-15);
    }

    #[test]
    fn more_copies_never_hurt(seed in any::<u64>(), lambda in 0.1f64..2.0, t in 1usize..=20) {
        let mut rng = rng_for(seed, 0);
        let sigma = full_rank_state(&mut rng, 3);
        let targets = dominated_targets(seed, &sigma, lambda, 3);
        let worst_fidelity = |t: usize| {
            let inst = rsp::build_jrs(&targets, &sigma, lambda, t).unwrap();
            let mut o = rsp::simulate_jrs_exact(&inst).unwrap();
            o.evaluate(&targets, ErrorMode::WorstCase).unwrap();
            o.fidelities.iter().copied().fold(f64::INFINITY, f64::min)
        };
        prop_assert!(worst_fidelity(t + 1) >= worst_fidelity(t) - 1e-12);
    }

    #[test]
    fn cost_bits_fits_the_message(t in 1usize..100_000) {
        let b = rsp::cost_bits(t);
        prop_assert!((t as u64) < (1u64 << b));
        prop_assert!(b == 0 || (t as u64) >= (1u64 << (b - 1)));
    }

    #[test]
    fn random_protocols_respect_the_bound(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let limits = FuzzLimits { max_n_bits: 3, max_total_bits: 4, max_local_qubits: 6, ..FuzzLimits::default() };
        let p = locc::random_protocol(&mut rng, &limits);
        let check = locc::check_bound(&p).unwrap();
        prop_assert!(check.holds, "slack {}", check.slack);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&check.success));
    }

    #[test]
    fn one_way_protocols_respect_the_bound(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let mut p = locc::random_protocol(&mut rng, &FuzzLimits { max_n_bits: 3, ..FuzzLimits::default() });
        p.rounds.retain(|r| r.speaker == Party::Alice);
        prop_assume!(p.validate().is_ok());
        let check = locc::check_bound(&p).unwrap();
        prop_assert!(check.one_way);
        prop_assert!(check.holds, "slack {}", check.slack);
    }

    #[test]
    fn baseline_is_tight(n in 1u32..=5, k in 0u32..=5) {
        prop_assume!(k <= n);
        let p_target = (0.5f64).powi(k as i32);
        let check = locc::check_bound(&locc::baseline_protocol(n, p_target).unwrap()).unwrap();
        prop_assert_eq!(check.alice_bits, n - k);
        prop_assert!((check.success - p_target).abs() <= 1e-12);
        prop_assert!(check.slack.abs() <= 1e-9);
    }

    #[test]
    fn net_covers_and_packs(seed in any::<u64>(), n in 1usize..=32, nu in 0.05f64..=1.0) {
        let e = weighted(seed, 2, n);
        let net = nets::build_net(&e, nu).unwrap();
        prop_assert!(nets::coverage_radius(&e, &net).unwrap() < nu);
        for (a, &i) in net.net_indices.iter().enumerate() {
            for &j in &net.net_indices[a + 1..] {
                prop_assert!(purified_distance(&e.states()[i], &e.states()[j]).unwrap() >= nu);
            }
        }
        let w = net.induced_weights.clone().unwrap();
        prop_assert_eq!(w.len(), net.len());
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let by_label = nets::build_net_ordered(&e, nu, NetOrder::Label).unwrap();
        prop_assert!(nets::coverage_radius(&e, &by_label).unwrap() < nu);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn sampled_success_tracks_exact(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let p: LoccProtocol = locc::random_protocol(&mut rng, &FuzzLimits { max_n_bits: 2, ..FuzzLimits::default() });
        let exact = locc::run_exact(&p).unwrap();
        let trials = 400;
        let run = locc::run_sampled(&p, trials, seed).unwrap();
        let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
        prop_assert!((run.success - exact).abs() <= 5.0 * sd + 1e-9, "{} vs {}", run.success, exact);
        prop_assert_eq!(run.transcripts.len(), trials);
    }
}
