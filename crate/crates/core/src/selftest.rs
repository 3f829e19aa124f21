//! Desk-scale acceptance suite.
//!
//! Each criterion draws its random instances from `rng_for(seed, (id << 32) | i)`
//! and compares against pinned tolerances multiplied by `tol_scale`. The
//! serialized report holds no timing, so equal configurations give
//! byte-identical reports; the elapsed time of each criterion is kept in a
//! field skipped by serde.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::divergences::{self, Ensemble};
use crate::error::Result;
use crate::hypothesis;
use crate::linalg::{self, c};
use crate::locc::{self, FuzzLimits};
use crate::minimax;
use crate::nets::{self, Direction, SampleKind};
use crate::operators::{BipartiteShape, DensityOperator};
use crate::random::{self, rng_for};
use crate::rsp;
use crate::smoothing;

/// Identifiers of the criteria run by [`run_all`].
pub const CRITERIA: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

/// Settings of one suite run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Multiplier applied to every pinned tolerance.
    pub tol_scale: f64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tol_scale: 1.0,
        }
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    /// Number of individual comparisons made.
    pub checks: usize,
    pub failures: usize,
    /// Largest observed deviation in the direction of failure (negative means slack).
    pub worst: f64,
    pub tolerance: f64,
    /// Runtime budget in seconds.
    pub time_limit_s: f64,
    pub details: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    /// Whether the criterion ran within its runtime budget.
    pub fn within_time(&self) -> bool {
        self.elapsed.as_secs_f64() <= self.time_limit_s
    }
}

/// Results of a full suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub version: String,
    pub config: SelftestConfig,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

impl SelftestReport {
    pub fn from_results(config: SelftestConfig, mut criteria: Vec<CriterionResult>) -> Self {
        criteria.sort_by_key(|r| r.id);
        let passed = criteria.iter().all(|r| r.passed);
        Self {
            version: crate::VERSION.into(),
            config,
            criteria,
            passed,
        }
    }
}

/// Run every criterion sequentially.
pub fn run_all(config: SelftestConfig) -> SelftestReport {
    let results = CRITERIA.iter().map(|&id| run_criterion(id, config)).collect();
    SelftestReport::from_results(config, results)
}

/// Run one criterion; unknown identifiers produce a failed result.
pub fn run_criterion(id: u32, config: SelftestConfig) -> CriterionResult {
    let start = Instant::now();
    let mut tally = match id {
        1 => np_vs_sdp(config),
        2 => dmax_dh_sandwich(config),
        3 => average_bracket(config),
        4 => worst_bracket(config),
        5 => orthogonal_values(config),
        6 => closed_form_vs_tensor(config),
        7 => locc_bound(config),
        8 => gap_example(config),
        9 => beta_convexity(config),
        10 => equipartition(config),
        11 => substate(config),
        12 => net_transfer(config),
        _ => {
            let mut t = Tally::new(id, "unknown criterion", 0.0, 0.0);
            t.fail(format!("no criterion with id {id}"));
            t
        }
    };
    tally.result.elapsed = start.elapsed();
    tally.finish()
}

struct Tally {
    result: CriterionResult,
}

impl Tally {
    fn new(id: u32, name: &str, tolerance: f64, time_limit_s: f64) -> Self {
        Self {
            result: CriterionResult {
                id,
                name: name.into(),
                passed: false,
                checks: 0,
                failures: 0,
                worst: f64::NEG_INFINITY,
                tolerance,
                time_limit_s,
                details: Vec::new(),
                elapsed: Duration::ZERO,
            },
        }
    }

    /// Record `excess ≤ tolerance`; `excess` is how far the checked quantity
    /// lies on the wrong side of its bound.
    fn check(&mut self, excess: f64, what: impl FnOnce() -> String) {
        self.result.checks += 1;
        if excess.is_nan() || excess > self.result.worst {
            self.result.worst = excess;
        }
        if !(excess <= self.result.tolerance) {
            self.fail(what());
        }
    }

    /// Record a boolean condition.
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.result.checks += 1;
        if !ok {
            self.fail(what());
        }
    }

    /// Record a computation; an error counts as a failure.
    fn attempt<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.result.checks += 1;
                self.fail(format!("{}: {e}", what()));
                None
            }
        }
    }

    fn fail(&mut self, msg: String) {
        self.result.failures += 1;
        if self.result.details.len() < 10 {
            self.result.details.push(msg);
        }
    }

    fn note(&mut self, msg: String) {
        self.result.details.push(msg);
    }

    fn finish(mut self) -> CriterionResult {
        self.result.passed = self.result.failures == 0 && self.result.checks > 0;
        if !self.result.worst.is_finite() && !self.result.worst.is_nan() {
            self.result.worst = 0.0;
        }
        self.result
    }
}

fn stream(config: SelftestConfig, id: u32, i: u64) -> ChaCha8Rng {
    rng_for(config.seed, (u64::from(id) << 32) | i)
}

/// Random ensemble of dimension 2 or 3 with 2 to 6 states and random weights.
pub fn random_ensemble(rng: &mut ChaCha8Rng) -> Ensemble {
    let d = rng.gen_range(2..=3);
    let n = rng.gen_range(2..=6);
    let states = (0..n).map(|_| random::any_state(rng, d)).collect();
    let p = random::probability_vector(rng, n);
    Ensemble::weighted(states, p).expect("sampled ensemble is valid")
}

fn ensembles(config: SelftestConfig, id: u32, count: u64) -> Vec<Ensemble> {
    (0..count)
        .map(|i| random_ensemble(&mut stream(config, id, i)))
        .collect()
}

fn np_vs_sdp(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(1, "Neyman-Pearson versus SDP", 1e-6 * config.tol_scale, 60.0);
    for i in 0..100 {
        let mut rng = stream(config, 1, i);
        let d = rng.gen_range(2..=3);
        let rho = random::any_state(&mut rng, d);
        let sigma = random::any_state(&mut rng, d);
        for eps in [0.0, 0.25, 0.5] {
            let np = t.attempt(hypothesis::beta_eps(&rho, &sigma, eps), || {
                format!("pair {i} eps {eps} bisection")
            });
            let sdp = t.attempt(hypothesis::beta_eps_sdp(&rho, &sigma, eps), || {
                format!("pair {i} eps {eps} SDP")
            });
            if let (Some((a, _)), Some(b)) = (np, sdp) {
                t.check((a - b).abs(), || {
                    format!("pair {i} eps {eps}: bisection {a} vs SDP {b}")
                });
            }
        }
    }
    t
}

fn dmax_dh_sandwich(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(2, "Dmax-Dh sandwich", 1e-4 * config.tol_scale, 300.0);
    for i in 0..200 {
        let mut rng = stream(config, 2, i);
        let rho = random::any_state(&mut rng, 2);
        let sigma = random::any_state(&mut rng, 2);
        let eps = rng.gen_range(0.2..0.8);
        let delta = eps * rng.gen_range(0.2..0.8);
        let Some(b) = t.attempt(hypothesis::dmax_dh_bridge(&rho, &sigma, eps, delta), || {
            format!("pair {i} bridge")
        }) else {
            continue;
        };
        let hi = smoothing::smooth_d_max(&rho, &sigma, (2.0 * (1.0 - eps)).sqrt());
        if let Some(v) = t.attempt(hi, || format!("pair {i} smooth Dmax at sqrt(2(1-eps))")) {
            t.check(excess(v, b.upper), || {
                format!("pair {i} eps {eps}: Dmax {v} > Dh {}", b.upper)
            });
        }
        let lo = smoothing::smooth_d_max(&rho, &sigma, (1.0 - eps).sqrt());
        if let Some(v) = t.attempt(lo, || format!("pair {i} smooth Dmax at sqrt(1-eps)")) {
            t.check(excess(b.lower, v), || {
                format!("pair {i} eps {eps} delta {delta}: Dmax {v} < {}", b.lower)
            });
        }
    }
    t
}

/// `a − b`, with `0` when both are the same infinity.
fn excess(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        a - b
    }
}

fn check_bracket(t: &mut Tally, i: u64, r: &rsp::BoundReport) {
    let eps = r.epsilon;
    t.check(r.lower() - r.achieved_bits, || {
        format!(
            "ensemble {i} eps {eps}: lower {} > achieved {}",
            r.lower(),
            r.achieved_bits
        )
    });
    t.check(r.achieved_bits - r.upper_bits, || {
        format!(
            "ensemble {i} eps {eps}: achieved {} > upper {}",
            r.achieved_bits, r.upper_bits
        )
    });
    t.check(r.achieved_error - eps, || {
        format!("ensemble {i} eps {eps}: error {} > eps", r.achieved_error)
    });
}

fn average_bracket(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(3, "average-case bracket", 1e-6 * config.tol_scale, 600.0);
    for (i, e) in ensembles(config, 3, 50).iter().enumerate() {
        for eps in [0.1, 0.3] {
            let r = rsp::average_case_bracket(e, eps);
            if let Some(r) = t.attempt(r, || format!("ensemble {i} eps {eps}")) {
                check_bracket(&mut t, i as u64, &r);
            }
        }
    }
    t
}

fn worst_bracket(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(4, "worst-case bracket", 1e-3 * config.tol_scale, 600.0);
    let mut unbounded = 0;
    for (i, e) in ensembles(config, 3, 50).iter().enumerate() {
        for eps in [0.1, 0.3] {
            let delta = (1.0 - eps * eps) / 2.0;
            let r = rsp::worst_case_bracket(e, eps, delta);
            if let Some(r) = t.attempt(r, || format!("ensemble {i} eps {eps}")) {
                unbounded += usize::from(r.lower_bits.is_none());
                check_bracket(&mut t, i as u64, &r);
            }
        }
    }
    t.note(format!("{unbounded} brackets with lower bound -inf"));
    t
}

fn orthogonal_values(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(5, "orthogonal ensembles", 1e-5 * config.tol_scale, 120.0);
    for n in [2usize, 4, 8] {
        let states: Vec<_> = (0..n).map(|i| DensityOperator::basis(n, i)).collect();
        let e = Ensemble::uniform(states).expect("basis ensemble is valid");
        let expect = (n as f64).log2();
        if let Some(v) = t.attempt(divergences::i_max_cq(&e), || format!("n {n} i_max")) {
            t.check((v - expect).abs(), || format!("n {n}: i_max {v} vs {expect}"));
        }
        let r = smoothing::min_max_radius(&e, 0.0);
        if let Some(r) = t.attempt(r, || format!("n {n} min-max radius")) {
            t.check((r.value - expect).abs(), || {
                format!("n {n}: radius {} vs {expect}", r.value)
            });
        }
    }
    t
}

/// Qubit targets with `σ_x ⪯ 2^λ σ`: `(1−w)σ + w ψ` with `w ≤ min(1, (2^λ−1) λ_min(σ))`.
fn dominated_targets(rng: &mut ChaCha8Rng, sigma: &DensityOperator, lambda: f64, count: usize) -> Vec<DensityOperator> {
    let lmin = linalg::min_eig(sigma.matrix()).max(0.0);
    let w = (0.99 * (lambda.exp2() - 1.0) * lmin).min(1.0);
    (0..count)
        .map(|_| {
            let psi = random::haar_pure(rng, sigma.dim());
            let m = sigma.matrix() * c(1.0 - w) + psi.matrix() * c(w);
            DensityOperator::from_numerical(&m, crate::StateKind::Normalized).expect("mixture of states")
        })
        .collect()
}

fn closed_form_vs_tensor(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(
        6,
        "closed form versus tensor simulation",
        1e-8 * config.tol_scale,
        120.0,
    );
    for (k, lambda) in [0.0, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let mut rng = stream(config, 6, k as u64);
        let sigmas = [
            DensityOperator::maximally_mixed(2),
            random::full_rank_state(&mut rng, 2),
        ];
        for (j, sigma) in sigmas.iter().enumerate() {
            let targets = dominated_targets(&mut rng, sigma, lambda, 3);
            for copies in 1..=6 {
                let Some(inst) = t.attempt(rsp::build_jrs(&targets, sigma, lambda, copies), || {
                    format!("lambda {lambda} sigma {j} t {copies} build")
                }) else {
                    continue;
                };
                let Some(closed) = t.attempt(rsp::closed_form_outputs(&inst), || "closed form".into()) else {
                    continue;
                };
                for (x, out) in closed.iter().enumerate() {
                    if let Some(sim) = t.attempt(rsp::simulate_copies(&inst, x), || format!("simulate x {x}")) {
                        let diff = linalg::max_abs_diff(&sim, out.matrix());
                        t.check(diff, || {
                            format!("lambda {lambda} sigma {j} t {copies} x {x}: diff {diff:e}")
                        });
                    }
                }
            }
        }
    }
    t
}

fn locc_bound(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(7, "LOCC bit-transmission bound", 1e-9 * config.tol_scale, 300.0);
    for n in 1..=6u32 {
        for k in 0..=n {
            let p = (-f64::from(k)).exp2();
            let run = locc::baseline_protocol(n, p).and_then(|b| locc::check_bound(&b));
            if let Some(b) = t.attempt(run, || format!("baseline n {n} k {k}")) {
                t.check(b.slack.abs(), || format!("baseline n {n} k {k}: slack {}", b.slack));
            }
        }
    }
    let fuzz = locc::fuzz_bound(200, config.seed, &FuzzLimits::default());
    if let Some(f) = t.attempt(fuzz, || "fuzz campaign".into()) {
        t.check(-f.min_slack, || format!("fuzz: min slack {}", f.min_slack));
        t.require(f.protocols == 200, || format!("fuzz ran {} protocols", f.protocols));
    }
    t
}

fn gap_example(config: SelftestConfig) -> Tally {
    let tol = 1e-9 * config.tol_scale;
    let mut t = Tally::new(8, "worst-case versus average-case gap", tol, 120.0);
    let Some(g) = t.attempt(rsp::gap_demo(10, 0.5), || "gap demo".into()) else {
        return t;
    };
    t.check((g.worst_lb - 10.0).abs(), || {
        format!("worst-case lower bound {}", g.worst_lb)
    });
    t.require(g.avg_cost_skewed == 0, || format!("skewed cost {}", g.avg_cost_skewed));
    t.require(g.skewed_error_ok, || format!("skewed error {}", g.skewed_error));
    t.check((g.geometric_bound - (3f64.log2() + 2.0)).abs(), || {
        format!("geometric bound {}", g.geometric_bound)
    });
    t.require(f64::from(g.geometric_cost) <= g.geometric_bound + tol, || {
        format!("geometric cost {} above bound", g.geometric_cost)
    });
    t.require(g.geometric_error_ok, || {
        format!("geometric error {}", g.geometric_error)
    });
    match &g.reduction {
        Some(r) => {
            t.check(r.required - r.success, || {
                format!("reduction at n {}: success {}", r.n_bits, r.success)
            });
            t.require(r.ok, || format!("reduction at n {} failed", r.n_bits));
        }
        None => t.fail("reduction was not simulated".into()),
    }
    t
}

fn beta_convexity(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(9, "convexity and concavity of beta", 1e-8 * config.tol_scale, 120.0);
    for i in 0..500 {
        let mut rng = stream(config, 9, i);
        let n = rng.gen_range(2..=3);
        let states: Vec<_> = (0..n).map(|_| random::any_state(&mut rng, 2)).collect();
        let e = Ensemble::uniform(states).expect("sampled ensemble is valid");
        let eps = rng.gen_range(0.0..0.9);
        let lam: f64 = rng.gen();
        let p0 = random::probability_vector(&mut rng, n);
        let p1 = random::probability_vector(&mut rng, n);
        let pm: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
        let s0 = random::any_state(&mut rng, 2);
        let s1 = random::any_state(&mut rng, 2);
        let sm = DensityOperator::from_numerical(
            &(s0.matrix() * c(lam) + s1.matrix() * c(1.0 - lam)),
            crate::StateKind::Normalized,
        )
        .expect("mixture of states");
        let beta = |t: &mut Tally, p: &[f64], s: &DensityOperator| {
            t.attempt(minimax::game_payoff(&e, eps, p, s), || format!("triple {i} beta"))
        };
        let convex = (beta(&mut t, &p0, &s0), beta(&mut t, &p1, &s0), beta(&mut t, &pm, &s0));
        if let (Some(b0), Some(b1), Some(bm)) = convex {
            let excess = bm - (lam * b0 + (1.0 - lam) * b1);
            t.check(excess, || format!("triple {i}: convexity in p violated by {excess:e}"));
        }
        let concave = (beta(&mut t, &p0, &s0), beta(&mut t, &p0, &s1), beta(&mut t, &p0, &sm));
        if let (Some(b0), Some(b1), Some(bm)) = concave {
            let excess = lam * b0 + (1.0 - lam) * b1 - bm;
            t.check(excess, || {
                format!("triple {i}: concavity in sigma violated by {excess:e}")
            });
        }
    }
    t
}

fn equipartition(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(10, "finite-n equipartition sandwich", 1e-3 * config.tol_scale, 300.0);
    let shape = BipartiteShape::new(2, 2);
    for i in 0..4 {
        let mut rng = stream(config, 10, i);
        let states = (0..2).map(|_| random::any_state(&mut rng, 2)).collect();
        let p = random::probability_vector(&mut rng, 2);
        let rho = Ensemble::weighted(states, p).and_then(|e| e.cq_state()?.to_density());
        let Some(rho) = t.attempt(rho, || format!("state {i}")) else {
            continue;
        };
        for n in [1, 2] {
            for eps in [0.1, 0.3] {
                let r = smoothing::qaep_check(&rho, shape, n, eps);
                let Some(r) = t.attempt(r, || format!("state {i} n {n} eps {eps}")) else {
                    continue;
                };
                if let Some(lb) = r.lhs_lb {
                    t.check(lb - r.value, || {
                        format!("state {i} n {n} eps {eps}: lower {lb} > {}", r.value)
                    });
                }
                t.check(r.value - r.rhs_ub, || {
                    format!("state {i} n {n} eps {eps}: value {} > upper {}", r.value, r.rhs_ub)
                });
            }
        }
    }
    t
}

fn substate(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(11, "substate consistency", 1e-4 * config.tol_scale, 300.0);
    for i in 0..100 {
        let mut rng = stream(config, 11, i);
        let rho = random::any_state(&mut rng, 2);
        let sigma = random::full_rank_state(&mut rng, 2);
        for eps in [0.3, 0.6] {
            let bound = divergences::substate_bound(&rho, &sigma, eps);
            let value = smoothing::smooth_d_max(&rho, &sigma, eps);
            if let (Some(b), Some(v)) = (
                t.attempt(bound, || format!("pair {i} eps {eps} bound")),
                t.attempt(value, || format!("pair {i} eps {eps} smooth Dmax")),
            ) {
                t.check(v - b, || format!("pair {i} eps {eps}: smooth Dmax {v} > {b}"));
            }
        }
    }
    t
}

fn net_transfer(config: SelftestConfig) -> Tally {
    let mut t = Tally::new(12, "net transfer", 1e-6 * config.tol_scale, 300.0);
    let (eps, nu) = (0.3, 0.1);
    for i in 0..20 {
        let mut rng = stream(config, 12, i);
        let n = rng.gen_range(3..=6);
        let kind = if rng.gen_bool(0.5) {
            SampleKind::HaarPure
        } else {
            SampleKind::HilbertSchmidtMixed
        };
        let states = nets::sample_states(2, n, kind, rng.gen());
        let e = states.and_then(|s| Ensemble::weighted(s, random::probability_vector(&mut rng, n)));
        let Some(e) = t.attempt(e, || format!("ensemble {i}")) else {
            continue;
        };
        let avg = nets::transfer_brackets(&e, eps, nu, Direction::AverageCase);
        if let Some(r) = t.attempt(avg, || format!("ensemble {i} average")) {
            t.check(r.composed_error - r.error_bound, || {
                format!("ensemble {i}: composed error {} > {}", r.composed_error, r.error_bound)
            });
        }
        let worst = nets::transfer_brackets(&e, eps, nu, Direction::WorstCase);
        if let Some(r) = t.attempt(worst, || format!("ensemble {i} worst")) {
            t.require(r.right_bits.is_some() && r.ordered, || {
                format!(
                    "ensemble {i}: worst-case sides {} / {:?} not ordered",
                    r.left_bits, r.right_bits
                )
            });
            t.check(r.composed_error - r.error_bound, || {
                format!(
                    "ensemble {i}: worst composed error {} > {}",
                    r.composed_error, r.error_bound
                )
            });
        }
    }
    t
}
