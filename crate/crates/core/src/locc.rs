//! Two-party LOCC protocols for transmitting classical bits.
//!
//! Alice holds an `n`-bit input `x` in a register `X`; she and Bob share a
//! pure state `Σ_r √λ_r |r⟩|r⟩` and may hold ancillas in `|0⟩`. In each round
//! the speaker applies a unitary to their whole local space, measures the
//! leftmost `k` qubits of it in the standard basis and sends the outcome,
//! which the receiver stores in a fresh `k`-qubit register appended to the
//! right of their local space. At the end Bob applies an output unitary and
//! measures his leftmost `n` qubits to obtain a guess `Y`.
//!
//! Every such protocol satisfies `m_A ≥ n + log p` with `p = Pr[Y = X]` for
//! uniform `X`, where `m_A` counts the bits Alice sends. The module evaluates
//! `p` exactly by propagating every measurement branch, or by sampling, and
//! provides the classical baseline that attains the bound, a random protocol
//! generator and the reduction from preparing basis states to sending bits.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::matrix_serde;
use crate::linalg::{self, c, CMat};
use crate::operators::{self, DensityOperator};
use crate::random::{self, rng_for};

/// Largest joint dimension `dim A · dim B` the simulator accepts.
pub const DIMENSION_CAP: usize = 1 << 14;
/// Largest admissible `‖U†U − I‖_max` for round unitaries.
pub const UNITARY_TOL: f64 = 1e-9;
/// Slack allowed in `m_A − n − log p ≥ 0` under exact evaluation.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// One round: a local unitary, then a measurement of `message_bits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub speaker: Party,
    #[serde(with = "matrix_serde")]
    pub unitary: CMat,
    pub message_bits: u32,
}

/// A complete protocol description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoccProtocol {
    pub n_bits: u32,
    /// Schmidt coefficients `λ_r` of the shared state (a probability vector).
    pub schmidt: Vec<f64>,
    #[serde(default)]
    pub alice_ancilla_qubits: u32,
    #[serde(default)]
    pub bob_ancilla_qubits: u32,
    pub rounds: Vec<Round>,
    /// Bob's final unitary; the identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputUnitary>,
}

/// Wrapper so that the output unitary can be optional in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutputUnitary(#[serde(with = "matrix_serde")] pub CMat);

/// Messages and output of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub input: u64,
    pub messages: Vec<u64>,
    pub output: u64,
    pub alice_bits: u32,
    pub bob_bits: u32,
}

/// Local dimensions before each round and at the end.
struct Layout {
    before: Vec<(usize, usize)>,
    last: (usize, usize),
}

impl LoccProtocol {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Bits sent by Alice.
    pub fn alice_bits(&self) -> u32 {
        self.bits_of(Party::Alice)
    }

    /// Bits sent by Bob.
    pub fn bob_bits(&self) -> u32 {
        self.bits_of(Party::Bob)
    }

    fn bits_of(&self, who: Party) -> u32 {
        self.rounds
            .iter()
            .filter(|r| r.speaker == who)
            .map(|r| r.message_bits)
            .sum()
    }

    /// Only Alice speaks.
    pub fn is_one_way(&self) -> bool {
        self.rounds.iter().all(|r| r.speaker == Party::Alice)
    }

    fn layout(&self) -> Result<Layout> {
        let e = self.schmidt.len();
        let mut da = (1usize << self.n_bits) * e * (1usize << self.alice_ancilla_qubits);
        let mut db = e * (1usize << self.bob_ancilla_qubits);
        let mut before = Vec::with_capacity(self.rounds.len());
        for r in &self.rounds {
            before.push((da, db));
            let grow = 1usize << r.message_bits;
            match r.speaker {
                Party::Alice => db *= grow,
                Party::Bob => da *= grow,
            }
            if da.saturating_mul(db) > DIMENSION_CAP {
                return Err(Error::DimensionBlowup {
                    dim: da.saturating_mul(db),
                    cap: DIMENSION_CAP,
                });
            }
        }
        Ok(Layout { before, last: (da, db) })
    }

    /// Check dimensions, unitarity and the shared state.
    pub fn validate(&self) -> Result<()> {
        if self.n_bits > 16 {
            return Err(Error::InvalidParameter("n_bits must be ≤ 16".into()));
        }
        if self.schmidt.is_empty() || self.schmidt.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::InvalidParameter(
                "schmidt: expected nonnegative coefficients".into(),
            ));
        }
        let total: f64 = self.schmidt.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("schmidt: coefficients sum to {total}")));
        }
        let layout = self.layout()?;
        for (i, (r, &(da, db))) in self.rounds.iter().zip(&layout.before).enumerate() {
            let local = match r.speaker {
                Party::Alice => da,
                Party::Bob => db,
            };
            check_unitary(&r.unitary, local, &format!("rounds[{i}]"))?;
            if local % (1usize << r.message_bits) != 0 {
                return Err(Error::InvalidParameter(format!(
                    "rounds[{i}]: cannot measure {} qubits of a {local}-dimensional space",
                    r.message_bits
                )));
            }
        }
        let db = layout.last.1;
        if let Some(u) = &self.output {
            check_unitary(&u.0, db, "output")?;
        }
        if db % (1usize << self.n_bits) != 0 {
            return Err(Error::InvalidParameter(format!(
                "Bob's final space of dimension {db} has no {} leftmost qubits",
                self.n_bits
            )));
        }
        Ok(())
    }

    /// Joint state for input `x` as a `dim A × dim B` amplitude matrix.
    fn initial(&self, x: usize) -> CMat {
        let e = self.schmidt.len();
        let anc_a = 1usize << self.alice_ancilla_qubits;
        let anc_b = 1usize << self.bob_ancilla_qubits;
        let mut psi = CMat::zeros((1 << self.n_bits) * e * anc_a, e * anc_b);
        for (r, &l) in self.schmidt.iter().enumerate() {
            psi[((x * e + r) * anc_a, r * anc_b)] = c(l.sqrt());
        }
        psi
    }
}

fn check_unitary(u: &CMat, dim: usize, what: &str) -> Result<()> {
    if u.nrows() != dim || u.ncols() != dim {
        return Err(Error::InvalidParameter(format!(
            "{what}: expected a {dim}x{dim} unitary, found {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let defect = linalg::max_abs_diff(&(u.adjoint() * u), &linalg::eye(dim));
    if defect > UNITARY_TOL {
        return Err(Error::InvalidParameter(format!(
            "{what}: not unitary (defect {defect:.3e})"
        )));
    }
    Ok(())
}

fn apply(psi: &CMat, round: &Round) -> CMat {
    match round.speaker {
        Party::Alice => &round.unitary * psi,
        Party::Bob => psi * round.unitary.transpose(),
    }
}

/// Keep outcome `m` of the speaker's leftmost `k` qubits and hand `m` to the receiver.
fn branch(psi: &CMat, speaker: Party, k: u32, m: usize) -> CMat {
    let grow = 1usize << k;
    let (da, db) = psi.shape();
    match speaker {
        Party::Alice => {
            let block = da / grow;
            let mut out = CMat::zeros(da, db * grow);
            for a in m * block..(m + 1) * block {
                for b in 0..db {
                    out[(a, b * grow + m)] = psi[(a, b)];
                }
            }
            out
        }
        Party::Bob => {
            let block = db / grow;
            let mut out = CMat::zeros(da * grow, db);
            for a in 0..da {
                for b in m * block..(m + 1) * block {
                    out[(a * grow + m, b)] = psi[(a, b)];
                }
            }
            out
        }
    }
}

/// Probability of outcome `m` on the speaker's leftmost `k` qubits.
fn outcome_weight(psi: &CMat, speaker: Party, k: u32, m: usize) -> f64 {
    let grow = 1usize << k;
    match speaker {
        Party::Alice => {
            let block = psi.nrows() / grow;
            psi.rows(m * block, block).norm_squared()
        }
        Party::Bob => {
            let block = psi.ncols() / grow;
            psi.columns(m * block, block).norm_squared()
        }
    }
}

fn finish(protocol: &LoccProtocol, psi: &CMat) -> CMat {
    match &protocol.output {
        Some(u) => psi * u.0.transpose(),
        None => psi.clone(),
    }
}

/// Probability that Bob's guess equals `y` in the final state.
fn guess_weight(protocol: &LoccProtocol, psi: &CMat, y: usize) -> f64 {
    let block = psi.ncols() >> protocol.n_bits;
    psi.columns(y * block, block).norm_squared()
}

/// Exact `Pr[Y = X]` for uniform `X`, summing over every measurement branch.
pub fn run_exact(protocol: &LoccProtocol) -> Result<f64> {
    protocol.validate()?;
    let inputs = 1usize << protocol.n_bits;
    let mut success = 0.0;
    for x in 0..inputs {
        let mut branches = vec![protocol.initial(x)];
        for r in &protocol.rounds {
            let mut next = Vec::with_capacity(branches.len() << r.message_bits);
            for psi in &branches {
                let rotated = apply(psi, r);
                for m in 0..(1usize << r.message_bits) {
                    if outcome_weight(&rotated, r.speaker, r.message_bits, m) > 0.0 {
                        next.push(branch(&rotated, r.speaker, r.message_bits, m));
                    }
                }
            }
            branches = next;
        }
        for psi in &branches {
            success += guess_weight(protocol, &finish(protocol, psi), x);
        }
    }
    Ok(success / inputs as f64)
}

fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Empirical success of `trials` runs together with their transcripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledRun {
    pub trials: usize,
    pub successes: usize,
    pub success: f64,
    pub transcripts: Vec<Transcript>,
}

/// Monte-Carlo evaluation; trial `j` uses the stream `rng_for(seed, j)`.
pub fn run_sampled(protocol: &LoccProtocol, trials: usize, seed: u64) -> Result<SampledRun> {
    protocol.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
    }
    let inputs = 1usize << protocol.n_bits;
    let mut successes = 0;
    let mut transcripts = Vec::with_capacity(trials);
    for j in 0..trials {
        let mut rng = rng_for(seed, j as u64);
        let x = rng.gen_range(0..inputs);
        let mut psi = protocol.initial(x);
        let mut messages = Vec::with_capacity(protocol.rounds.len());
        for r in &protocol.rounds {
            let rotated = apply(&psi, r);
            let weights: Vec<f64> = (0..(1usize << r.message_bits))
                .map(|m| outcome_weight(&rotated, r.speaker, r.message_bits, m))
                .collect();
            let m = sample_index(&mut rng, &weights);
            psi = branch(&rotated, r.speaker, r.message_bits, m);
            let norm = psi.norm();
            psi /= c(norm);
            messages.push(m as u64);
        }
        let last = finish(protocol, &psi);
        let weights: Vec<f64> = (0..inputs).map(|y| guess_weight(protocol, &last, y)).collect();
        let y = sample_index(&mut rng, &weights);
        if y == x {
            successes += 1;
        }
        transcripts.push(Transcript {
            input: x as u64,
            messages,
            output: y as u64,
            alice_bits: protocol.alice_bits(),
            bob_bits: protocol.bob_bits(),
        });
    }
    Ok(SampledRun {
        trials,
        successes,
        success: successes as f64 / trials as f64,
        transcripts,
    })
}

/// `H^{⊗q}`.
fn hadamard_power(q: u32) -> CMat {
    let h = CMat::from_fn(2, 2, |i, j| c(if i == 1 && j == 1 { -1.0 } else { 1.0 } / 2f64.sqrt()));
    (0..q).fold(linalg::eye(1), |acc, _| linalg::kron(&acc, &h))
}

/// Permutation `|g⟩|μ⟩ ↦ |μ⟩|g⟩` for registers of dimensions `dg` and `dm`.
fn swap_registers(dg: usize, dm: usize) -> CMat {
    let mut p = CMat::zeros(dg * dm, dg * dm);
    for g in 0..dg {
        for mu in 0..dm {
            p[(mu * dg + g, g * dm + mu)] = c(1.0);
        }
    }
    p
}

/// Alice sends the `⌈n − log(1/p)⌉` leading bits of `x`; Bob guesses the rest uniformly.
pub fn baseline_protocol(n_bits: u32, p_target: f64) -> Result<LoccProtocol> {
    if !(p_target > 0.0 && p_target <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p_target must lie in (0,1], got {p_target}"
        )));
    }
    let m = ((n_bits as f64 + p_target.log2()) - 1e-12)
        .ceil()
        .clamp(0.0, n_bits as f64) as u32;
    let guess = n_bits - m;
    let mut rounds = Vec::new();
    if m > 0 {
        rounds.push(Round {
            speaker: Party::Alice,
            unitary: linalg::eye(1 << n_bits),
            message_bits: m,
        });
    }
    let dg = 1usize << guess;
    let dm = 1usize << m;
    let output = swap_registers(dg, dm) * linalg::kron(&hadamard_power(guess), &linalg::eye(dm));
    Ok(LoccProtocol {
        n_bits,
        schmidt: vec![1.0],
        alice_ancilla_qubits: 0,
        bob_ancilla_qubits: guess,
        rounds,
        output: Some(OutputUnitary(output)),
    })
}

/// `m_A`, `p` and the slack `m_A − n − log p` of a protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub n_bits: u32,
    pub alice_bits: u32,
    pub bob_bits: u32,
    pub success: f64,
    /// `+∞` (serialized as `null`) when `p = 0`.
    pub slack: f64,
    pub one_way: bool,
    pub holds: bool,
}

/// Evaluate `p` exactly and the slack of `m_A ≥ n + log p`.
pub fn check_bound(protocol: &LoccProtocol) -> Result<BoundCheck> {
    let p = run_exact(protocol)?;
    let m_a = protocol.alice_bits();
    let slack = m_a as f64 - protocol.n_bits as f64 - p.log2();
    Ok(BoundCheck {
        n_bits: protocol.n_bits,
        alice_bits: m_a,
        bob_bits: protocol.bob_bits(),
        success: p,
        slack,
        one_way: protocol.is_one_way(),
        holds: slack >= -SLACK_TOL,
    })
}

/// Limits of [`random_protocol`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzLimits {
    pub max_n_bits: u32,
    pub max_ebits: u32,
    pub max_rounds: usize,
    pub max_message_bits: u32,
    /// Cap on the total number of message bits over all rounds.
    pub max_total_bits: u32,
    /// Cap on either party's number of local qubits.
    pub max_local_qubits: u32,
}

impl Default for FuzzLimits {
    fn default() -> Self {
        Self {
            max_n_bits: 4,
            max_ebits: 3,
            max_rounds: 4,
            max_message_bits: 2,
            max_total_bits: 5,
            max_local_qubits: 7,
        }
    }
}

fn random_permutation<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.shuffle(rng);
    let mut p = CMat::zeros(dim, dim);
    for (j, &i) in perm.iter().enumerate() {
        p[(i, j)] = c(1.0);
    }
    p
}

/// Haar-random or permutation unitary, with equal probability.
fn random_local<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    if rng.gen_bool(0.5) {
        random::haar_unitary(rng, dim)
    } else {
        random_permutation(rng, dim)
    }
}

/// A random protocol within `limits`.
///
/// Shared states are maximally entangled or random; unitaries are Haar
/// random or classical permutations; Bob receives enough ancilla qubits to
/// hold an `n`-bit guess.
pub fn random_protocol<R: Rng + ?Sized>(rng: &mut R, limits: &FuzzLimits) -> LoccProtocol {
    let n_bits = rng.gen_range(1..=limits.max_n_bits.max(1));
    let ebits = rng.gen_range(0..=limits.max_ebits);
    let e = 1usize << ebits;
    let schmidt = if rng.gen_bool(0.5) {
        vec![1.0 / e as f64; e]
    } else {
        random::probability_vector(rng, e)
    };
    let alice_ancilla_qubits = if n_bits + ebits < limits.max_local_qubits {
        rng.gen_range(0..=1)
    } else {
        0
    };
    let bob_ancilla_qubits = n_bits.saturating_sub(ebits);
    let mut qa = n_bits + ebits + alice_ancilla_qubits;
    let mut qb = ebits + bob_ancilla_qubits;
    let mut budget = limits.max_total_bits;
    let mut rounds = Vec::new();
    for _ in 0..rng.gen_range(1..=limits.max_rounds.max(1)) {
        let speaker = if rng.gen_bool(0.5) { Party::Alice } else { Party::Bob };
        let (own, other) = match speaker {
            Party::Alice => (qa, qb),
            Party::Bob => (qb, qa),
        };
        let room = limits.max_local_qubits.saturating_sub(other);
        let k_max = limits.max_message_bits.min(budget).min(room).min(own);
        let k = rng.gen_range(0..=k_max);
        budget -= k;
        rounds.push(Round {
            speaker,
            unitary: random_local(rng, 1 << own),
            message_bits: k,
        });
        match speaker {
            Party::Alice => qb += k,
            Party::Bob => qa += k,
        }
    }
    LoccProtocol {
        n_bits,
        schmidt,
        alice_ancilla_qubits,
        bob_ancilla_qubits,
        rounds,
        output: Some(OutputUnitary(random_local(rng, 1 << qb))),
    }
}

/// Summary of a fuzz campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub protocols: usize,
    pub min_slack: f64,
    pub violations: usize,
    pub limits: FuzzLimits,
}

/// Check the bound on random protocol `i` of a campaign, drawn from `rng_for(seed, i)`.
pub fn fuzz_check(i: usize, seed: u64, limits: &FuzzLimits) -> Result<BoundCheck> {
    let mut rng = rng_for(seed, i as u64);
    check_bound(&random_protocol(&mut rng, limits))
}

impl FuzzReport {
    /// Summarize the checks of a campaign.
    pub fn from_checks(checks: &[BoundCheck], limits: &FuzzLimits) -> Self {
        Self {
            protocols: checks.len(),
            min_slack: checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min),
            violations: checks.iter().filter(|c| !c.holds).count(),
            limits: *limits,
        }
    }
}

/// Check the bound on `count` random protocols; see [`fuzz_check`].
pub fn fuzz_bound(count: usize, seed: u64, limits: &FuzzLimits) -> Result<FuzzReport> {
    let checks = (0..count)
        .map(|i| fuzz_check(i, seed, limits))
        .collect::<Result<Vec<_>>>()?;
    Ok(FuzzReport::from_checks(&checks, limits))
}

/// Success of decoding `x` from Bob's state `σ̃_x` by measuring in the
/// computational basis, for targets `|x⟩⟨x|`, `x < N`: `(1/N) Σ_x ⟨x|σ̃_x|x⟩`.
pub fn rsp_to_bits(outputs: &[DensityOperator]) -> Result<f64> {
    let n = outputs.len();
    if n == 0 {
        return Err(Error::InvalidParameter("outputs: expected ≥ 1".into()));
    }
    let mut success = 0.0;
    let mut fid_sq = 0.0;
    for (x, s) in outputs.iter().enumerate() {
        if s.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.dim(),
            });
        }
        success += s.matrix()[(x, x)].re;
        fid_sq += operators::fidelity(&DensityOperator::basis(n, x), s)?.powi(2);
    }
    let (success, fid_sq) = (success / n as f64, fid_sq / n as f64);
    if success < fid_sq - 1e-9 {
        return Err(Error::NumericalFailure(format!(
            "decoding success {success} below the fidelity bound {fid_sq}"
        )));
    }
    Ok(success)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn baseline_examples() {
        for (n, p, bits, success) in [(4, 1.0, 4, 1.0), (4, 0.25, 2, 0.25), (3, 0.5, 2, 0.5)] {
            let proto = baseline_protocol(n, p).unwrap();
            let check = check_bound(&proto).unwrap();
            assert_eq!(check.alice_bits, bits);
            assert_abs_diff_eq!(check.success, success, epsilon = 1e-12);
            assert_abs_diff_eq!(check.slack, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_communication_guess() {
        let proto = LoccProtocol {
            n_bits: 2,
            schmidt: vec![1.0],
            alice_ancilla_qubits: 0,
            bob_ancilla_qubits: 2,
            rounds: Vec::new(),
            output: None,
        };
        assert_abs_diff_eq!(run_exact(&proto).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let proto = baseline_protocol(3, 0.5).unwrap();
        let back = LoccProtocol::from_json(&proto.to_json().unwrap()).unwrap();
        assert_eq!(run_exact(&back).unwrap(), run_exact(&proto).unwrap());
    }

    #[test]
    fn depolarized_outputs() {
        let n = 4;
        let eta = 0.3;
        let outs: Vec<DensityOperator> = (0..n)
            .map(|x| {
                let m = DensityOperator::basis(n, x).matrix() * c(1.0 - eta) + linalg::eye(n) * c(eta / n as f64);
                DensityOperator::new(m).unwrap()
            })
            .collect();
        assert_abs_diff_eq!(rsp_to_bits(&outs).unwrap(), 1.0 - eta * (1.0 - 0.25), epsilon = 1e-12);
    }

    #[test]
    fn small_fuzz_campaign() {
        let report = fuzz_bound(20, 11, &FuzzLimits::default()).unwrap();
        assert_eq!(report.violations, 0, "min slack {}", report.min_slack);
    }
}
