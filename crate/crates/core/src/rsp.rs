//! Remote state preparation by rejection sampling.
//!
//! Alice and Bob share `t` copies of a purification `|w⟩` of a reference
//! state `σ` on `C² ⊗ K ⊗ H`, where Bob holds `H`. Every target satisfies
//! `σ_x ⪯ 2^λ σ`, so `σ = 2^{−λ}σ_x + (1−2^{−λ})ξ_x` and Alice can rotate each
//! copy into `|w_x⟩ = √(2^{−λ})|0⟩|v_x⟩ + √(1−2^{−λ})|1⟩|u_x⟩` with a unitary
//! on her registers. She measures every flag qubit and sends the lowest index
//! of a copy that returned `0` (or `0` if none did), which costs
//! `⌈log(t+1)⌉` bits. Bob keeps the indicated copy or prepares `I/d`.
//!
//! The module builds and validates such instances, simulates them in closed
//! form, by an explicit `t`-copy state-vector simulation and by sampling, and
//! evaluates the average-case and worst-case constructions together with
//! their cost brackets and the gap examples between the two error notions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::divergences::{self, Ensemble};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::locc;
use crate::minimax;
use crate::operators::{self, DensityOperator, PureState, StateKind};
use crate::random::rng_for;
use crate::smoothing::{self, SmoothingMode};

/// Slack allowed in `σ_x ⪯ 2^λ σ`.
pub const DOMINATION_TOL: f64 = 1e-8;
/// Largest admissible `‖(U_x ⊗ 1)|w⟩ − |w_x⟩‖`.
pub const UNITARY_TOL: f64 = 1e-7;
/// Largest admissible disagreement between the closed form and the simulation.
pub const ORACLE_TOL: f64 = 1e-8;
/// Largest number of copies simulated as an explicit state vector.
pub const ORACLE_MAX_COPIES: usize = 6;
/// Largest state-vector length of the explicit simulation.
pub const ORACLE_MAX_LEN: usize = 1 << 20;
/// Tolerance used when comparing costs against their brackets.
pub const BRACKET_TOL: f64 = 1e-3;
/// Tolerance used when comparing achieved errors against `ε`.
pub const ERROR_TOL: f64 = 1e-6;

/// One validated instance of the rejection-sampling protocol.
#[derive(Debug, Clone)]
pub struct JrsInstance {
    lambda: f64,
    t: usize,
    sigma: DensityOperator,
    targets: Vec<DensityOperator>,
    residuals: Vec<Option<DensityOperator>>,
    shared: PureState,
    rotated: Vec<PureState>,
    unitaries: Vec<CMat>,
    unitary_residual: f64,
}

impl JrsInstance {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn copies(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn sigma(&self) -> &DensityOperator {
        &self.sigma
    }

    /// The states `σ_x` that a successful copy leaves with Bob.
    pub fn targets(&self) -> &[DensityOperator] {
        &self.targets
    }

    /// The residual states `ξ_x` (absent when `λ = 0`).
    pub fn residuals(&self) -> &[Option<DensityOperator>] {
        &self.residuals
    }

    /// The shared state `|w⟩` on `C² ⊗ K ⊗ H`.
    pub fn shared_state(&self) -> &PureState {
        &self.shared
    }

    /// The rotated states `|w_x⟩`.
    pub fn rotated_states(&self) -> &[PureState] {
        &self.rotated
    }

    /// Alice's unitaries `U_x` on `C² ⊗ K`.
    pub fn unitaries(&self) -> &[CMat] {
        &self.unitaries
    }

    /// Largest `‖(U_x ⊗ 1)|w⟩ − |w_x⟩‖` over the targets.
    pub fn unitary_residual(&self) -> f64 {
        self.unitary_residual
    }

    /// Probability `(1−2^{−λ})^t` that every copy fails.
    pub fn failure_probability(&self) -> f64 {
        (1.0 - (-self.lambda).exp2()).powi(self.t as i32)
    }

    /// `⌈log(t+1)⌉`.
    pub fn cost_bits(&self) -> u32 {
        cost_bits(self.t)
    }
}

/// Bits needed for a message in `{0, …, t}`.
pub fn cost_bits(t: usize) -> u32 {
    (t as u64 + 1).next_power_of_two().trailing_zeros()
}

/// Matrix of a vector on `X ⊗ H` with rows indexed by `X` and columns by `H`.
fn as_matrix(v: &CVec, d: usize) -> CMat {
    let rows = v.len() / d;
    CMat::from_fn(rows, d, |r, h| v[r * d + h])
}

fn as_vector(m: &CMat) -> CVec {
    let d = m.ncols();
    CVec::from_fn(m.nrows() * d, |i, _| m[(i / d, i % d)])
}

/// Build and validate an instance for `targets` with reference `sigma`.
///
/// Requires `σ_x ⪯ 2^λ σ + 10⁻⁸·I`, `λ ≥ 0` and `t ≥ 1`.
pub fn build_jrs(targets: &[DensityOperator], sigma: &DensityOperator, lambda: f64, t: usize) -> Result<JrsInstance> {
    if targets.is_empty() {
        return Err(Error::InvalidParameter("targets: expected ≥ 1".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be ≥ 0, got {lambda}")));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("t must be ≥ 1".into()));
    }
    if !sigma.is_normalized() {
        return Err(Error::InvalidState("sigma must be normalized".into()));
    }
    let d = sigma.dim();
    let scale = lambda.exp2();
    for (index, s) in targets.iter().enumerate() {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        if !s.is_normalized() {
            return Err(Error::InvalidState(format!("target {index} must be normalized")));
        }
        let gap = sigma.matrix() * c(scale) - s.matrix();
        let excess = -linalg::min_eig(&gap);
        if excess > DOMINATION_TOL {
            return Err(Error::DominationViolated { index, excess });
        }
    }

    let a = 1.0 / scale;
    let w_sys = purify_vec(sigma)?;
    // |w⟩ = |0⟩ ⊗ purification of σ on K ⊗ H.
    let mut shared = CVec::zeros(2 * d * d);
    shared.rows_mut(0, d * d).copy_from(&w_sys);
    let m_w = as_matrix(&shared, d);

    let mut residuals = Vec::with_capacity(targets.len());
    let mut rotated = Vec::with_capacity(targets.len());
    let mut unitaries = Vec::with_capacity(targets.len());
    let mut unitary_residual: f64 = 0.0;
    for s in targets {
        let v_x = purify_vec(s)?;
        let mut w_x = CVec::zeros(2 * d * d);
        let xi = if lambda > 0.0 {
            let raw = (sigma.matrix() - s.matrix() * c(a)) / c(1.0 - a);
            let xi = DensityOperator::from_numerical(&raw, StateKind::Normalized)?;
            let u_x = purify_vec(&xi)?;
            w_x.rows_mut(0, d * d).copy_from(&(v_x * c(a.sqrt())));
            w_x.rows_mut(d * d, d * d).copy_from(&(u_x * c((1.0 - a).sqrt())));
            Some(xi)
        } else {
            w_x.rows_mut(0, d * d).copy_from(&v_x);
            None
        };
        let m_wx = as_matrix(&w_x, d);
        let u = mapping_unitary(&m_w, &m_wx)?;
        let mapped = as_vector(&(&u * &m_w));
        unitary_residual = unitary_residual.max((mapped - &w_x).norm());
        residuals.push(xi);
        rotated.push(PureState::normalized(w_x)?);
        unitaries.push(u);
    }
    if unitary_residual > UNITARY_TOL {
        return Err(Error::NumericalFailure(format!(
            "Uhlmann unitary residual {unitary_residual:.3e} exceeds {UNITARY_TOL:.0e}"
        )));
    }
    Ok(JrsInstance {
        lambda,
        t,
        sigma: sigma.clone(),
        targets: targets.to_vec(),
        residuals,
        shared: PureState::normalized(shared)?,
        rotated,
        unitaries,
        unitary_residual,
    })
}

/// Unitary `U` with `U from = to` for two matrices with the same Gram matrix.
///
/// With `from†from = V S² V†`, the columns of `from·V·S⁻¹` and `to·V·S⁻¹`
/// are orthonormal frames of the two ranges; `U` maps one frame to the other
/// (the polar factor of their overlap) and completes arbitrarily on the
/// complements. Dividing by `S` first keeps directions with tiny singular
/// values as accurate as the large ones, which the polar factor of
/// `from·to†` alone does not.
fn mapping_unitary(from: &CMat, to: &CMat) -> Result<CMat> {
    let n = from.nrows();
    let gram = linalg::herm_eig(&(from.adjoint() * from));
    let keep: Vec<usize> = (0..gram.values.len()).filter(|&i| gram.values[i] > 1e-28).collect();
    let whiten = |m: &CMat| -> CMat {
        let mut out = CMat::zeros(n, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            let col = m * gram.vectors.column(i) / c(gram.values[i].sqrt());
            out.set_column(j, &col);
        }
        out
    };
    let orthonormal = |m: CMat| -> Result<CMat> {
        let (p, _, q) = linalg::svd_full(&m)?;
        let r = m.ncols();
        Ok(p.columns(0, r) * q.adjoint())
    };
    let a = linalg::complete_unitary(&orthonormal(whiten(from))?, n);
    let b = linalg::complete_unitary(&orthonormal(whiten(to))?, n);
    Ok(b * a.adjoint())
}

fn purify_vec(rho: &DensityOperator) -> Result<CVec> {
    Ok(operators::purify(rho)?.amplitudes().clone())
}

/// How the error of an outcome is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ErrorMode {
    /// `max_x P(Q(x), σ̃_x)`.
    WorstCase,
    /// `√(1 − (Σ_x p_x F(Q(x), σ̃_x))²)`.
    AverageCase(Vec<f64>),
}

/// Bob's output states together with their quality and the message cost.
#[derive(Debug, Clone)]
pub struct RspOutcome {
    pub outputs: Vec<DensityOperator>,
    /// `F(Q(x), σ̃_x)` against the current references.
    pub fidelities: Vec<f64>,
    pub t: usize,
    pub cost_bits: u32,
    pub error_mode: ErrorMode,
    pub achieved_error: f64,
    /// Closed form versus state-vector simulation, when the latter was run.
    pub oracle_residual: Option<f64>,
    /// Empirical fraction of runs in which every copy failed (sampled runs only).
    pub failure_fractions: Option<Vec<f64>>,
}

impl RspOutcome {
    /// Recompute fidelities and the achieved error against `references`.
    pub fn evaluate(&mut self, references: &[DensityOperator], mode: ErrorMode) -> Result<()> {
        if references.len() != self.outputs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.outputs.len(),
                found: references.len(),
            });
        }
        self.fidelities = references
            .iter()
            .zip(&self.outputs)
            .map(|(q, s)| operators::fidelity(q, s).map(|f| f.min(1.0)))
            .collect::<Result<_>>()?;
        self.achieved_error = match &mode {
            ErrorMode::WorstCase => self
                .fidelities
                .iter()
                .map(|&f| operators::purified_distance_from_fidelity(f))
                .fold(0.0, f64::max),
            ErrorMode::AverageCase(p) => {
                if p.len() != self.fidelities.len() {
                    return Err(Error::DimensionMismatch {
                        expected: self.fidelities.len(),
                        found: p.len(),
                    });
                }
                let f: f64 = p.iter().zip(&self.fidelities).map(|(p, f)| p * f).sum();
                operators::purified_distance_from_fidelity(f.min(1.0))
            }
        };
        self.error_mode = mode;
        Ok(())
    }
}

/// Closed-form output `(1 − f^t)σ_x + f^t·I/d` with `f = 1 − 2^{−λ}`.
pub fn closed_form_outputs(instance: &JrsInstance) -> Result<Vec<DensityOperator>> {
    let d = instance.dim();
    let fail = instance.failure_probability();
    instance
        .targets
        .iter()
        .map(|s| {
            let m = s.matrix() * c(1.0 - fail) + linalg::eye(d) * c(fail / d as f64);
            DensityOperator::new(linalg::hermitize(&m))
        })
        .collect()
}

/// Output of the `t`-copy protocol for input `x`, by explicit simulation.
///
/// Builds `|w⟩^{⊗t}`, applies `U_x ⊗ 1` to every copy, and for every pattern
/// of flag outcomes gives Bob the `H` register of the lowest copy that
/// returned `0`, or `I/d` when all copies returned `1`.
pub fn simulate_copies(instance: &JrsInstance, x: usize) -> Result<CMat> {
    let d = instance.dim();
    let t = instance.t;
    let block = 2 * d * d;
    let len = (block as u128).pow(t as u32);
    if t > ORACLE_MAX_COPIES || len > ORACLE_MAX_LEN as u128 {
        return Err(Error::DimensionBlowup {
            dim: len.min(usize::MAX as u128) as usize,
            cap: ORACLE_MAX_LEN,
        });
    }
    let len = len as usize;
    let u = instance
        .unitaries
        .get(x)
        .ok_or_else(|| Error::InvalidParameter(format!("no target with index {x}")))?;

    let w = instance.shared.amplitudes();
    let mut psi = CVec::from_element(1, c(1.0));
    for _ in 0..t {
        psi = psi.kronecker(w);
    }

    // Copy `i` occupies digit `i` (most significant first) in base `block`;
    // inside a copy the index is `(flag·d + k)·d + h`.
    let ck = 2 * d;
    for i in 0..t {
        let post = block.pow((t - 1 - i) as u32);
        let pre = len / (block * post);
        let mut next = CVec::zeros(len);
        for p in 0..pre {
            for q in 0..post {
                for h in 0..d {
                    for row in 0..ck {
                        let mut acc = c(0.0);
                        for col in 0..ck {
                            acc += u[(row, col)] * psi[(p * block + col * d + h) * post + q];
                        }
                        next[(p * block + row * d + h) * post + q] = acc;
                    }
                }
            }
        }
        psi = next;
    }

    let flag = |idx: usize, i: usize| -> usize {
        let digit = (idx / block.pow((t - 1 - i) as u32)) % block;
        digit / (d * d)
    };
    let mut out = CMat::zeros(d, d);
    let mut fail_weight = 0.0;
    for idx in 0..len {
        let winner = (0..t).find(|&i| flag(idx, i) == 0);
        match winner {
            None => fail_weight += psi[idx].norm_sqr(),
            Some(k) => {
                let stride = block.pow((t - 1 - k) as u32);
                let h = (idx / stride) % d;
                if h != 0 {
                    continue;
                }
                for h1 in 0..d {
                    for h2 in 0..d {
                        out[(h1, h2)] += psi[idx + h1 * stride] * psi[idx + h2 * stride].conj();
                    }
                }
            }
        }
    }
    out += linalg::eye(d) * c(fail_weight / d as f64);
    Ok(out)
}

/// Exact outputs of the protocol, cross-checked against the state-vector
/// simulation whenever it fits within [`ORACLE_MAX_COPIES`] and [`ORACLE_MAX_LEN`].
///
/// Fidelities are reported against the instance targets with
/// [`ErrorMode::WorstCase`]; use [`RspOutcome::evaluate`] for other references.
pub fn simulate_jrs_exact(instance: &JrsInstance) -> Result<RspOutcome> {
    let outputs = closed_form_outputs(instance)?;
    let block = 2 * instance.dim() * instance.dim();
    let fits = instance.t <= ORACLE_MAX_COPIES && (block as u128).pow(instance.t as u32) <= ORACLE_MAX_LEN as u128;
    let oracle_residual = if fits {
        let mut worst: f64 = 0.0;
        for (x, s) in outputs.iter().enumerate() {
            let sim = simulate_copies(instance, x)?;
            worst = worst.max(linalg::max_abs_diff(&sim, s.matrix()));
        }
        if worst > ORACLE_TOL {
            return Err(Error::NumericalFailure(format!(
                "closed form and simulation differ by {worst:.3e}"
            )));
        }
        Some(worst)
    } else {
        None
    };
    let mut outcome = RspOutcome {
        outputs,
        fidelities: Vec::new(),
        t: instance.t,
        cost_bits: instance.cost_bits(),
        error_mode: ErrorMode::WorstCase,
        achieved_error: 0.0,
        oracle_residual,
        failure_fractions: None,
    };
    outcome.evaluate(&instance.targets, ErrorMode::WorstCase)?;
    Ok(outcome)
}

/// Monte-Carlo realization of the protocol with `trials` runs per input.
///
/// Run `j` for input `x` draws its flag outcomes from the stream
/// `rng_for(seed, x·trials + j)`, so the record depends only on the seed.
pub fn simulate_jrs_sampled(instance: &JrsInstance, trials: usize, seed: u64) -> Result<RspOutcome> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
    }
    let d = instance.dim();
    let mut outputs = Vec::with_capacity(instance.targets.len());
    let mut fractions = Vec::with_capacity(instance.targets.len());
    for (x, (s, w_x)) in instance.targets.iter().zip(&instance.rotated).enumerate() {
        let amp = w_x.amplitudes();
        let success: f64 = (0..d * d).map(|i| amp[i].norm_sqr()).sum();
        let mut failures = 0usize;
        for j in 0..trials {
            let mut rng = rng_for(seed, (x * trials + j) as u64);
            if !(0..instance.t).any(|_| rng.gen::<f64>() < success) {
                failures += 1;
            }
        }
        let phi = failures as f64 / trials as f64;
        let m = s.matrix() * c(1.0 - phi) + linalg::eye(d) * c(phi / d as f64);
        outputs.push(DensityOperator::from_numerical(&m, StateKind::Normalized)?);
        fractions.push(phi);
    }
    let mut outcome = RspOutcome {
        outputs,
        fidelities: Vec::new(),
        t: instance.t,
        cost_bits: instance.cost_bits(),
        error_mode: ErrorMode::WorstCase,
        achieved_error: 0.0,
        oracle_residual: None,
        failure_fractions: Some(fractions),
    };
    outcome.evaluate(&instance.targets, ErrorMode::WorstCase)?;
    Ok(outcome)
}

/// Project every target onto `supp σ`, renormalize, and return the smallest
/// `λ ≥ 0` with `σ_x ⪯ 2^λ σ` for all of them.
fn dominate(targets: &[CMat], sigma: &DensityOperator) -> Result<(Vec<DensityOperator>, f64)> {
    let (v, _) = sigma.eigen().support(divergences::SUPPORT_THRESHOLD);
    let proj = &v * v.adjoint();
    let mut out = Vec::with_capacity(targets.len());
    let mut lambda: f64 = 0.0;
    for m in targets {
        let s = DensityOperator::from_numerical(&(&proj * m * &proj), StateKind::Normalized)?;
        lambda = lambda.max(divergences::d_max(&s, sigma)?);
        out.push(s);
    }
    if !lambda.is_finite() {
        return Err(Error::NumericalFailure(
            "reference state does not dominate the targets".into(),
        ));
    }
    Ok((out, lambda + 1e-12))
}

/// Result of one of the protocol constructions.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub outcome: RspOutcome,
    /// The smoothed quantity the construction is built from.
    pub smoothed_value: f64,
    /// The `λ` of the instance actually simulated.
    pub lambda: f64,
    pub t: usize,
    pub cost_bits: u32,
    /// The analytic cost bound of the construction.
    pub cost_bound: f64,
    pub within_error: bool,
    /// The simulated instance, for further (e.g. sampled) runs.
    pub instance: JrsInstance,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1], got {eps}")));
    }
    Ok(())
}

/// `log ln(8/ε²) + 2`, the additive term of the average-case upper bound.
pub fn avg_case_additive(eps: f64) -> f64 {
    (8.0 / (eps * eps)).ln().log2() + 2.0
}

/// `log(1+ε²) + log ln(2/ε⁴) + 2`, the additive term of the worst-case upper bound.
pub fn worst_case_additive(eps: f64) -> f64 {
    let e2 = eps * eps;
    (1.0 + e2).log2() + (2.0 / (e2 * e2)).ln().log2() + 2.0
}

/// Average-case construction at error `ε` for a weighted ensemble.
///
/// Smooths the max-information at `ε/(2√2)` with the marginal held fixed,
/// uses the smoothed conditionals as targets and the normalized dominating
/// operator as reference, picks `t = ⌈2^λ ln(8/ε²)⌉`, and evaluates the
/// exact outputs against the original states and weights.
pub fn avg_case_protocol(ensemble: &Ensemble, eps: f64) -> Result<ProtocolRun> {
    check_eps(eps)?;
    let p = ensemble.require_weights()?.to_vec();
    let smooth = smoothing::smooth_i_max_cq(ensemble, eps / (2.0 * 2f64.sqrt()), SmoothingMode::FixedMarginal)?;
    let sigma = DensityOperator::from_numerical(&smooth.tau, StateKind::Normalized)?;
    let conditionals: Vec<CMat> = smooth
        .conditionals
        .iter()
        .zip(&p)
        .map(|(m, &px)| if px > 0.0 { m.clone() } else { sigma.matrix().clone() })
        .collect();
    let (targets, lambda) = dominate(&conditionals, &sigma)?;
    let t = ((lambda.exp2() * (8.0 / (eps * eps)).ln()).ceil() as usize).max(1);
    let instance = build_jrs(&targets, &sigma, lambda, t)?;
    let mut outcome = simulate_jrs_exact(&instance)?;
    outcome.evaluate(ensemble.states(), ErrorMode::AverageCase(p))?;
    let within_error = outcome.achieved_error <= eps + ERROR_TOL;
    Ok(ProtocolRun {
        cost_bits: outcome.cost_bits,
        within_error,
        outcome,
        smoothed_value: smooth.value,
        lambda,
        t,
        cost_bound: smooth.value + avg_case_additive(eps),
        instance,
    })
}

/// Worst-case construction at error `ε` (weights ignored).
///
/// Takes the witnesses `(ω_x, σ′)` of the min-max radius at `ε/√(1+ε²)`,
/// uses `ρ_x = ω_x/Tr ω_x` as targets and `σ′/Tr σ′` as reference, picks
/// `t = ⌈2^α(1+ε²) ln(2/ε⁴)⌉`, and checks `P(Q(x), σ̃_x) ≤ ε` for every `x`.
pub fn worst_case_protocol(ensemble: &Ensemble, eps: f64) -> Result<ProtocolRun> {
    check_eps(eps)?;
    let e2 = eps * eps;
    let radius = smoothing::min_max_radius(ensemble, eps / (1.0 + e2).sqrt())?;
    let sigma = DensityOperator::from_numerical(&radius.sigma_prime, StateKind::Normalized)?;
    let (targets, lambda) = dominate(&radius.omegas, &sigma)?;
    let alpha = radius.value;
    let t = ((alpha.exp2() * (1.0 + e2) * (2.0 / (e2 * e2)).ln()).ceil() as usize).max(1);
    let instance = build_jrs(&targets, &sigma, lambda, t)?;
    let mut outcome = simulate_jrs_exact(&instance)?;
    outcome.evaluate(ensemble.states(), ErrorMode::WorstCase)?;
    let within_error = outcome.achieved_error <= eps + ERROR_TOL;
    Ok(ProtocolRun {
        cost_bits: outcome.cost_bits,
        within_error,
        outcome,
        smoothed_value: alpha,
        lambda,
        t,
        cost_bound: alpha + worst_case_additive(eps),
        instance,
    })
}

/// A `(lower, achieved, upper)` cost bracket with its checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub delta: Option<f64>,
    /// `None` encodes a lower bound of `−∞`.
    pub lower_bits: Option<f64>,
    pub achieved_bits: f64,
    pub upper_bits: f64,
    pub mode: String,
    pub witness_files: Vec<String>,
    pub achieved_error: f64,
    pub error_ok: bool,
    pub ordered: bool,
    /// Whether `lower ≤ achieved` is implied by the computed numbers.
    pub lower_certified: bool,
    pub lambda: f64,
    pub t: usize,
    pub notes: Vec<String>,
}

impl BoundReport {
    /// All checks of the report hold.
    pub fn holds(&self) -> bool {
        self.ordered && self.error_ok
    }

    /// The lower bound as a real number, `−∞` when absent.
    pub fn lower(&self) -> f64 {
        self.lower_bits.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn csv_header() -> &'static str {
        "epsilon,lower,achieved,upper"
    }

    /// One CSV row `epsilon,lower,achieved,upper` with 12 significant digits.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            fmt_sig(self.epsilon),
            fmt_sig(self.lower()),
            fmt_sig(self.achieved_bits),
            fmt_sig(self.upper_bits)
        )
    }
}

/// Format with 12 significant digits; infinities print as `inf`/`-inf`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{:.11e}", x)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Average-case bracket: `I_max^ε ≤ cost ≤ I_max^{ε/(2√2)} + log ln(8/ε²) + 2`.
///
/// Both smooth max-informations are computed with the marginal held fixed,
/// which over-estimates them; the lower end is then an upper estimate of the
/// true lower bound, so `lower ≤ achieved` still certifies the true ordering.
pub fn average_case_bracket(ensemble: &Ensemble, eps: f64) -> Result<BoundReport> {
    check_eps(eps)?;
    let lower = smoothing::smooth_i_max_cq(ensemble, eps, SmoothingMode::FixedMarginal)?.value;
    let run = avg_case_protocol(ensemble, eps)?;
    let achieved = run.cost_bits as f64;
    let upper = run.cost_bound;
    let lower_certified = lower <= achieved + BRACKET_TOL;
    Ok(BoundReport {
        epsilon: eps,
        delta: None,
        lower_bits: finite(lower),
        achieved_bits: achieved,
        upper_bits: upper,
        mode: "average-case/fixed-marginal".into(),
        witness_files: Vec::new(),
        achieved_error: run.outcome.achieved_error,
        error_ok: run.within_error,
        ordered: lower_certified && achieved <= upper + BRACKET_TOL,
        lower_certified,
        lambda: run.lambda,
        t: run.t,
        notes: vec!["lower end is an upper estimate of the smooth max-information".into()],
    })
}

/// Worst-case bracket: the minimax lower bound, the worst-case construction's
/// cost, and `α + log(1+ε²) + log ln(2/ε⁴) + 2`.
pub fn worst_case_bracket(ensemble: &Ensemble, eps: f64, delta: f64) -> Result<BoundReport> {
    check_eps(eps)?;
    let lower = minimax::worst_case_lower_bound(ensemble, eps, delta)?;
    let run = worst_case_protocol(ensemble, eps)?;
    let achieved = run.cost_bits as f64;
    let upper = run.cost_bound;
    let lower_certified = lower <= achieved + BRACKET_TOL;
    let mut notes = Vec::new();
    if lower == f64::NEG_INFINITY {
        notes.push("smoothing radius √(2(ε²+δ)) ≥ 1, lower bound is −∞".into());
    }
    Ok(BoundReport {
        epsilon: eps,
        delta: Some(delta),
        lower_bits: finite(lower),
        achieved_bits: achieved,
        upper_bits: upper,
        mode: "worst-case".into(),
        witness_files: Vec::new(),
        achieved_error: run.outcome.achieved_error,
        error_ok: run.within_error,
        ordered: lower_certified && achieved <= upper + BRACKET_TOL,
        lower_certified,
        lambda: run.lambda,
        t: run.t,
        notes,
    })
}

/// The worst-case versus average-case gap on `2^n` orthogonal states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub n_bits: u32,
    pub epsilon: f64,
    /// Worst-case lower bound `n`, valid because `log(1−ε²) > −1`.
    pub worst_lb: f64,
    /// `n + log(1−ε²)`, the bound the LOCC reduction gives directly.
    pub worst_lb_exact: f64,
    pub avg_cost_skewed: u32,
    pub skewed_fidelity: f64,
    pub skewed_error: f64,
    pub skewed_error_ok: bool,
    /// The skewed distribution is a point mass (only then is the error 0 at `ε = 0`).
    pub skewed_point_mass: bool,
    pub geometric_t: usize,
    pub geometric_cost: u32,
    pub geometric_bound: f64,
    pub geometric_fidelity: f64,
    pub geometric_error: f64,
    pub geometric_error_ok: bool,
    pub reduction: Option<ReductionCheck>,
}

/// Exact simulation of the reduction from worst-case preparation of basis
/// states to bit transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub n_bits: u32,
    pub success: f64,
    pub required: f64,
    pub cost_bits: u32,
    pub ok: bool,
}

/// Largest `n` for which [`gap_demo`] evaluates fidelities explicitly.
pub const GAP_MAX_BITS: u32 = 10;
/// Largest `n` for which [`gap_demo`] simulates the reduction.
pub const GAP_REDUCTION_BITS: u32 = 3;

/// Evaluate the gap examples for `2^n` computational basis states at error `ε`.
///
/// Skewed distribution: `p_{x₀} = √(1−ε²)` and the rest uniform, served at
/// cost 0 by Bob always preparing `|x₀⟩`. Geometric distribution:
/// `p_x = 2^{−x}` for `x < 2^n` and `p_{2^n} = 2^{−(2^n−1)}`, served by
/// sending `x` when `x ≤ t` and a uniformly random `y ≤ t` otherwise.
pub fn gap_demo(n_bits: u32, eps: f64) -> Result<GapRecord> {
    if !(0.0..std::f64::consts::FRAC_1_SQRT_2).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0, 1/√2), got {eps}")));
    }
    if n_bits > GAP_MAX_BITS {
        return Err(Error::InvalidParameter(format!(
            "n_bits must be ≤ {GAP_MAX_BITS}, got {n_bits}"
        )));
    }
    let m = 1usize << n_bits;
    let e2 = eps * eps;
    let target = (1.0 - e2).sqrt();

    // Skewed distribution, Bob outputs |x₀⟩ with x₀ = 0.
    let rest = if m > 1 { (1.0 - target) / (m - 1) as f64 } else { 0.0 };
    let p_skew: Vec<f64> = (0..m)
        .map(|x| match (x, m) {
            (_, 1) => 1.0,
            (0, _) => target,
            _ => rest,
        })
        .collect();
    let x0 = PureState::basis(m, 0);
    let skewed_fidelity: f64 = (0..m)
        .map(|x| p_skew[x] * PureState::basis(m, x).amplitudes().dotc(x0.amplitudes()).norm())
        .sum();
    let skewed_error = operators::purified_distance_from_fidelity(skewed_fidelity.min(1.0));

    // Geometric distribution over labels 1..=m.
    let mut p_geo: Vec<f64> = (1..m).map(|x| (-(x as f64)).exp2()).collect();
    p_geo.push((-((m - 1) as f64)).exp2());
    let levels = if eps > 0.0 {
        (2.0 / e2).log2().ceil() as usize
    } else {
        usize::MAX
    };
    let geometric_t = levels.min(m);
    // Output for x ≤ t is |x⟩; for x > t it is the uniform mixture of |1⟩..|t⟩.
    let geometric_fidelity: f64 = (1..=m)
        .map(|x| {
            let overlap = if x <= geometric_t { 1.0 } else { 0.0 };
            p_geo[x - 1] * overlap
        })
        .sum();
    let geometric_error = operators::purified_distance_from_fidelity(geometric_fidelity.min(1.0));
    let geometric_cost = (geometric_t as u64).next_power_of_two().trailing_zeros();
    let inner = if eps > 0.0 {
        (m as f64).min((2.0 / e2).log2())
    } else {
        m as f64
    };
    let geometric_bound = inner.log2() + 2.0;

    let reduction = if eps > 0.0 {
        let n_r = n_bits.min(GAP_REDUCTION_BITS);
        let dim = 1usize << n_r;
        let states: Vec<DensityOperator> = (0..dim).map(|x| DensityOperator::basis(dim, x)).collect();
        let run = worst_case_protocol(&Ensemble::from_states(states)?, eps)?;
        let success = locc::rsp_to_bits(&run.outcome.outputs)?;
        let required = 1.0 - e2;
        Some(ReductionCheck {
            n_bits: n_r,
            success,
            required,
            cost_bits: run.cost_bits,
            ok: success >= required - ERROR_TOL,
        })
    } else {
        None
    };

    Ok(GapRecord {
        n_bits,
        epsilon: eps,
        worst_lb: n_bits as f64,
        worst_lb_exact: n_bits as f64 + (1.0 - e2).log2(),
        avg_cost_skewed: 0,
        skewed_fidelity,
        skewed_error,
        skewed_error_ok: skewed_error <= eps + 1e-9,
        skewed_point_mass: p_skew.iter().filter(|&&p| p > 0.0).count() == 1,
        geometric_t,
        geometric_cost,
        geometric_bound,
        geometric_fidelity,
        geometric_error,
        geometric_error_ok: geometric_error <= eps + 1e-9 && geometric_cost as f64 <= geometric_bound,
        reduction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn qubit(a: f64, b: f64) -> DensityOperator {
        DensityOperator::from_diagonal(&[a, b]).unwrap()
    }

    #[test]
    fn cost_bits_values() {
        let got: Vec<u32> = (1..=8).map(cost_bits).collect();
        assert_eq!(got, vec![1, 2, 2, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn trivial_instance_at_lambda_zero() {
        let s = DensityOperator::maximally_mixed(2);
        let inst = build_jrs(&[s.clone(), s.clone()], &s, 0.0, 3).unwrap();
        assert!(inst.residuals().iter().all(Option::is_none));
        let out = simulate_jrs_exact(&inst).unwrap();
        for o in &out.outputs {
            assert!(linalg::max_abs_diff(o.matrix(), s.matrix()) < 1e-12);
        }
    }

    #[test]
    fn qubit_decomposition_example() {
        let inst = build_jrs(&[qubit(1.0, 0.0)], &DensityOperator::maximally_mixed(2), 1.0, 2).unwrap();
        let xi = inst.residuals()[0].as_ref().unwrap();
        assert!(linalg::max_abs_diff(xi.matrix(), qubit(0.0, 1.0).matrix()) < 1e-12);
        let out = simulate_jrs_exact(&inst).unwrap();
        let expect = qubit(0.875, 0.125);
        assert!(linalg::max_abs_diff(out.outputs[0].matrix(), expect.matrix()) < 1e-12);
        assert!(out.oracle_residual.unwrap() < 1e-12);
        assert_eq!(out.cost_bits, 2);
    }

    #[test]
    fn domination_is_enforced() {
        let err = build_jrs(&[qubit(1.0, 0.0)], &qubit(0.9, 0.1), 0.1, 1).unwrap_err();
        assert!(matches!(err, Error::DominationViolated { index: 0, .. }));
    }

    #[test]
    fn sampled_is_deterministic() {
        let inst = build_jrs(&[qubit(1.0, 0.0)], &DensityOperator::maximally_mixed(2), 1.0, 1).unwrap();
        let a = simulate_jrs_sampled(&inst, 1000, 7).unwrap();
        let b = simulate_jrs_sampled(&inst, 1000, 7).unwrap();
        assert_eq!(a.failure_fractions, b.failure_fractions);
    }

    #[test]
    fn additive_terms() {
        assert_abs_diff_eq!(avg_case_additive(0.1), 800f64.ln().log2() + 2.0, epsilon = 1e-12);
        assert!((avg_case_additive(0.1) - 4.74).abs() < 0.01);
    }

    #[test]
    fn gap_formulas() {
        let g = gap_demo(10, 0.5).unwrap();
        assert_eq!(g.worst_lb, 10.0);
        assert_eq!(g.avg_cost_skewed, 0);
        assert!(g.skewed_error_ok);
        assert_eq!(g.geometric_t, 3);
        assert_eq!(g.geometric_cost, 2);
        assert_abs_diff_eq!(g.geometric_bound, 3f64.log2() + 2.0, epsilon = 1e-12);
        assert!(g.geometric_error_ok);
        let r = g.reduction.unwrap();
        assert!(r.ok, "reduction success {}", r.success);
    }
}
