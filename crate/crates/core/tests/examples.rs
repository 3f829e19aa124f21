//! Worked examples checked against oracles computed independently here.
//!
//! Classical (diagonal) cases use direct formulas: Bhattacharyya sums for the
//! fidelity, fractional-knapsack Neyman–Pearson tests for `β`, and grid
//! scans over diagonal measurements for the observational divergence.
//! Frozen constants were evaluated once from the closed forms noted beside them.

use oneshot_rsp::divergences::{self, Ensemble};
use oneshot_rsp::hypothesis;
use oneshot_rsp::linalg::{self, c, CMat};
use oneshot_rsp::locc::{self, LoccProtocol, OutputUnitary};
use oneshot_rsp::minimax;
use oneshot_rsp::nets;
use oneshot_rsp::operators::{fidelity, purified_distance};
use oneshot_rsp::random::{probability_vector, rng_for};
use oneshot_rsp::rsp;
use oneshot_rsp::smoothing;
use oneshot_rsp::{BipartiteShape, DensityOperator};

/// `√0.375 + √0.125`.
const BHATTACHARYYA_HALF_VS_3_4: f64 = 0.965_925_826_289_068_2;
/// `H(1/4)`.
const BINARY_ENTROPY_QUARTER: f64 = 0.811_278_124_459_132_8;
/// `H(cos²(π/8))`, the entropy of `½(|0⟩⟨0| + |+⟩⟨+|)`.
const HOLEVO_ZERO_PLUS: f64 = 0.600_876_036_692_856_2;
/// `log ln 800 + 2`.
const AVG_ADDITIVE_AT_0_1: f64 = 4.740_843_764_531_65;
/// `log 1.09 + log ln(2/0.0081) + 2`.
const WORST_ADDITIVE_AT_0_3: f64 = 4.586_128_653_489_607;
/// `log(0.99·0.51/0.125) + 3 log 3`.
const CORRECTION_EPS_0_1_DELTA_0_5: f64 = 6.768_957_084_665_124;
/// `−log(0.5·0.75/0.25³) − 3 log 3`.
const BRIDGE_LOWER_IDENTICAL: f64 = -9.339_850_002_884_624;
/// `1/0.25 + log(4/3)`.
const SUBSTATE_PURE_VS_MIXED: f64 = 4.415_037_499_278_844;

fn diag(v: &[f64]) -> DensityOperator {
    DensityOperator::from_diagonal(v).unwrap()
}

fn plus() -> DensityOperator {
    DensityOperator::new(CMat::from_element(2, 2, c(0.5))).unwrap()
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// `min Σ Q_i q_i` s.t. `Σ Q_i p_i ≥ 1−ε`, `Q_i ∈ [0,1]`, filling outcomes by
/// decreasing likelihood ratio.
fn classical_beta(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| (p[b] * q[a]).total_cmp(&(p[a] * q[b])));
    let mut need = 1.0 - eps;
    let mut beta = 0.0;
    for i in order {
        if need <= 0.0 {
            break;
        }
        if p[i] <= 0.0 {
            continue;
        }
        let take = (need / p[i]).min(1.0);
        beta += take * q[i];
        need -= take * p[i];
    }
    beta
}

fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!((got - want).abs() <= tol, "{what}: got {got}, want {want}");
}

#[test]
fn fidelity_and_distance_examples() {
    let (a, b) = (diag(&[0.5, 0.5]), diag(&[0.75, 0.25]));
    assert_close(fidelity(&a, &b).unwrap(), BHATTACHARYYA_HALF_VS_3_4, 1e-7, "fidelity");
    let pd = (1.0 - BHATTACHARYYA_HALF_VS_3_4.powi(2)).sqrt();
    assert_close(purified_distance(&a, &b).unwrap(), pd, 1e-7, "purified distance");
    let zero = DensityOperator::basis(2, 0);
    assert_close(fidelity(&zero, &plus()).unwrap(), 0.5f64.sqrt(), 1e-9, "pure overlap");
    assert_close(fidelity(&a, &a).unwrap(), 1.0, 1e-9, "identical");
}

#[test]
fn diagonal_fidelity_is_the_bhattacharyya_sum() {
    let mut rng = rng_for(7, 0);
    for _ in 0..100 {
        let (p, q) = (probability_vector(&mut rng, 3), probability_vector(&mut rng, 3));
        let oracle: f64 = p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum();
        assert_close(fidelity(&diag(&p), &diag(&q)).unwrap(), oracle, 1e-9, "Bhattacharyya");
    }
}

#[test]
fn entropy_examples() {
    assert_close(
        divergences::von_neumann(&diag(&[0.75, 0.25])).unwrap(),
        BINARY_ENTROPY_QUARTER,
        1e-9,
        "H(1/4)",
    );
    assert_close(binary_entropy(0.25), BINARY_ENTROPY_QUARTER, 1e-15, "oracle H(1/4)");
    let e = Ensemble::uniform(vec![DensityOperator::basis(2, 0), plus()]).unwrap();
    let oracle = binary_entropy((std::f64::consts::PI / 8.0).cos().powi(2));
    assert_close(oracle, HOLEVO_ZERO_PLUS, 1e-12, "oracle Holevo");
    assert_close(divergences::holevo(&e).unwrap(), HOLEVO_ZERO_PLUS, 1e-9, "Holevo");
    let bell = DensityOperator::new(CMat::from_fn(4, 4, |i, j| {
        c(if [0, 3].contains(&i) && [0, 3].contains(&j) {
            0.5
        } else {
            0.0
        })
    }))
    .unwrap();
    assert_close(
        divergences::mutual_information(&bell, BipartiteShape::new(2, 2)).unwrap(),
        2.0,
        1e-9,
        "Bell",
    );
}

#[test]
fn divergence_examples() {
    let zero = DensityOperator::basis(2, 0);
    let mixed = DensityOperator::maximally_mixed(2);
    assert_close(
        divergences::relative_entropy(&zero, &mixed).unwrap(),
        1.0,
        1e-9,
        "S(0‖I/2)",
    );
    assert_eq!(
        divergences::relative_entropy(&zero, &DensityOperator::basis(2, 1)).unwrap(),
        f64::INFINITY
    );
    assert_close(
        divergences::d_max(&diag(&[0.5, 0.5]), &diag(&[0.75, 0.25])).unwrap(),
        1.0,
        1e-9,
        "D_max",
    );
    let correlated = diag(&[0.5, 0.0, 0.0, 0.5]);
    assert_close(
        divergences::i_max(&correlated, BipartiteShape::new(2, 2)).unwrap(),
        1.0,
        1e-6,
        "I_max",
    );
    let t = divergences::t_of_q(
        &Ensemble::from_states(vec![zero.clone(), DensityOperator::basis(2, 1)]).unwrap(),
        1e-10,
        10_000,
    )
    .unwrap();
    assert_close(t.value, 1.0, 1e-8, "max over p of I");
    assert_close(t.p[0], 0.5, 1e-6, "optimal p");
}

#[test]
fn observational_divergence_matches_a_diagonal_scan() {
    let (r, s) = (diag(&[0.5, 0.5]), diag(&[0.9, 0.1]));
    let mut oracle = f64::NEG_INFINITY;
    for i in 0..=200 {
        for j in 0..=200 {
            let (a, b) = (i as f64 / 200.0, j as f64 / 200.0);
            let (tr, ts) = (0.5 * a + 0.5 * b, 0.9 * a + 0.1 * b);
            if tr > 0.0 {
                oracle = oracle.max(tr * (tr / ts).log2());
            }
        }
    }
    assert_close(divergences::d_obs(&r, &s, 512).unwrap(), oracle, 1e-4, "D_obs");
    assert_close(
        divergences::d_obs(&diag(&[1.0, 0.0]), &diag(&[0.5, 0.5]), 512).unwrap(),
        1.0,
        1e-6,
        "D_obs pure",
    );
    assert_close(
        divergences::substate_bound(&diag(&[1.0, 0.0]), &diag(&[0.5, 0.5]), 0.5).unwrap(),
        SUBSTATE_PURE_VS_MIXED,
        1e-5,
        "substate bound",
    );
}

#[test]
fn beta_matches_classical_neyman_pearson() {
    let (b, q) = hypothesis::beta_eps(&diag(&[0.5, 0.5]), &diag(&[0.9, 0.1]), 0.5).unwrap();
    assert_close(b, 0.1, 1e-9, "β");
    assert_close(q.matrix[(1, 1)].re, 1.0, 1e-9, "optimal test");
    assert_close(
        hypothesis::d_h(&diag(&[0.5, 0.5]), &diag(&[0.9, 0.1]), 0.5).unwrap(),
        5f64.log2(),
        1e-9,
        "D_h",
    );
    let mut rng = rng_for(11, 0);
    for k in 0..200 {
        let (p, q) = (probability_vector(&mut rng, 4), probability_vector(&mut rng, 4));
        let eps = (k as f64) / 200.0 * 0.95;
        let got = hypothesis::beta_eps(&diag(&p), &diag(&q), eps).unwrap().0;
        assert_close(got, classical_beta(&p, &q, eps), 1e-9, "classical β");
    }
}

#[test]
fn bridge_and_correction_arithmetic() {
    let r = diag(&[0.3, 0.7]);
    let bridge = hypothesis::dmax_dh_bridge(&r, &r, 0.5, 0.25).unwrap();
    assert_close(bridge.upper, 0.0, 1e-9, "bridge upper");
    assert_close(bridge.lower, BRIDGE_LOWER_IDENTICAL, 1e-9, "bridge lower");
    assert_close(
        minimax::lower_bound_correction(0.1, 0.5),
        CORRECTION_EPS_0_1_DELTA_0_5,
        1e-12,
        "correction",
    );
    assert_close(
        rsp::avg_case_additive(0.1),
        AVG_ADDITIVE_AT_0_1,
        1e-12,
        "average additive",
    );
    assert_close(
        rsp::worst_case_additive(0.3),
        WORST_ADDITIVE_AT_0_3,
        1e-12,
        "worst additive",
    );
}

#[test]
fn smoothing_examples() {
    let r = diag(&[0.3, 0.7]);
    assert_close(
        smoothing::smooth_d_max(&r, &r, 0.5).unwrap(),
        0.75f64.log2(),
        1e-5,
        "scaled state",
    );
    let orth: Vec<_> = (0..4).map(|i| DensityOperator::basis(4, i)).collect();
    for n in [2, 3, 4] {
        let e = Ensemble::from_states(orth[..n].to_vec()).unwrap();
        assert_close(
            smoothing::min_max_radius(&e, 0.0).unwrap().value,
            (n as f64).log2(),
            1e-5,
            "radius",
        );
    }
}

#[test]
fn game_on_orthogonal_states_is_worth_one_bit() {
    let e = Ensemble::uniform(vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)]).unwrap();
    for lambda in [0.2, 0.5, 0.8] {
        let s = minimax::solve_saddle(&e, lambda, minimax::DEFAULT_TOL, 50).unwrap();
        assert_close(s.value, (1.0 - lambda) / 2.0, 1e-4, "game value");
        assert_close(s.d_h(lambda), 1.0, 1e-3, "game D_h");
    }
}

#[test]
fn rejection_sampling_examples() {
    let zero = DensityOperator::basis(2, 0);
    let sigma = DensityOperator::maximally_mixed(2);
    let inst = rsp::build_jrs(std::slice::from_ref(&zero), &sigma, 1.0, 2).unwrap();
    let out = rsp::closed_form_outputs(&inst).unwrap();
    assert!(linalg::max_abs_diff(out[0].matrix(), diag(&[0.875, 0.125]).matrix()) <= 1e-12);
    let sim = rsp::simulate_copies(&inst, 0).unwrap();
    assert!(linalg::max_abs_diff(&sim, diag(&[0.875, 0.125]).matrix()) <= 1e-10);

    let once = rsp::build_jrs(&[zero], &sigma, 1.0, 1).unwrap();
    let trials = 20_000;
    let run = rsp::simulate_jrs_sampled(&once, trials, 3).unwrap();
    let frac = run.failure_fractions.unwrap()[0];
    let sd = (0.25 / trials as f64).sqrt();
    assert!((frac - 0.5).abs() <= 3.0 * sd, "failure fraction {frac}");
}

#[test]
fn locc_examples() {
    let verbatim = locc::check_bound(&locc::baseline_protocol(4, 1.0).unwrap()).unwrap();
    assert_eq!((verbatim.alice_bits, verbatim.success, verbatim.slack), (4, 1.0, 0.0));
    let half = locc::check_bound(&locc::baseline_protocol(3, 0.5).unwrap()).unwrap();
    assert_eq!(half.alice_bits, 2);
    assert_close(half.success, 0.5, 1e-12, "baseline(3, 1/2)");
    let quarter = locc::check_bound(&locc::baseline_protocol(4, 0.25).unwrap()).unwrap();
    assert_eq!(quarter.alice_bits, 2);
    assert_close(quarter.slack, 0.0, 1e-12, "baseline(4, 1/4) slack");

    let silent = LoccProtocol {
        n_bits: 2,
        schmidt: vec![1.0],
        alice_ancilla_qubits: 0,
        bob_ancilla_qubits: 2,
        rounds: Vec::new(),
        output: Some(OutputUnitary(linalg::eye(4))),
    };
    assert_close(locc::run_exact(&silent).unwrap(), 0.25, 1e-12, "fixed guess");

    let trials = 20_000;
    let run = locc::run_sampled(&locc::baseline_protocol(4, 0.25).unwrap(), trials, 5).unwrap();
    let sd = (0.25 * 0.75 / trials as f64).sqrt();
    assert!(
        (run.success - 0.25).abs() <= 3.0 * sd,
        "sampled success {}",
        run.success
    );
}

#[test]
fn decoding_depolarized_outputs() {
    for (n, eta) in [(1u32, 0.3), (2, 0.1), (3, 0.5)] {
        let m = 1usize << n;
        let outputs: Vec<_> = (0..m)
            .map(|x| {
                let mut v = vec![eta / m as f64; m];
                v[x] += 1.0 - eta;
                diag(&v)
            })
            .collect();
        let want = 1.0 - eta * (1.0 - 1.0 / m as f64);
        assert_close(
            locc::rsp_to_bits(&outputs).unwrap(),
            want,
            1e-12,
            "depolarized decoding",
        );
    }
}

#[test]
fn net_examples() {
    let theta = 0.3f64.asin();
    let ket = DensityOperator::new(CMat::from_fn(2, 2, |i, j| {
        let v = [theta.cos(), theta.sin()];
        c(v[i] * v[j])
    }))
    .unwrap();
    let pair = Ensemble::from_states(vec![DensityOperator::basis(2, 0), ket]).unwrap();
    assert_eq!(nets::build_net(&pair, 0.5).unwrap().len(), 1);

    let a = DensityOperator::basis(2, 0);
    let b = DensityOperator::basis(2, 1);
    let four = Ensemble::uniform(vec![a.clone(), a, b.clone(), b]).unwrap();
    let net = nets::build_net(&four, 0.5).unwrap();
    assert_eq!(net.induced_weights, Some(vec![0.5, 0.5]));
}

#[test]
fn gap_examples() {
    let g = rsp::gap_demo(10, 0.5).unwrap();
    assert_eq!(g.worst_lb, 10.0);
    assert_eq!(g.avg_cost_skewed, 0);
    assert_close(g.geometric_bound, 3f64.log2() + 2.0, 1e-12, "geometric bound");
    let small = rsp::gap_demo(3, 0.5).unwrap();
    let red = small.reduction.unwrap();
    assert!(
        red.ok && red.success >= 0.75 - 1e-12,
        "reduction success {}",
        red.success
    );
}
