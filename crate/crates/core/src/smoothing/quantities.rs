//! Smoothed one-shot quantities posed as SDPs on the interior-point kernel.
//!
//! Fidelity constraints `F(ρ, X) ≥ f` use the block characterization
//! `max Re Tr Y` over `[[ρ, Y], [Y†, X]] ⪰ 0`. Every block is written on the
//! support of the fixed operator so that the feasible set has an interior.

use std::cell::RefCell;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};

use super::sdp::{Affine, LmiBuilder, MatExpr};
use crate::divergences::{
    self, binary_entropy, mutual_information, CqState, Ensemble, SUPPORT_THRESHOLD, WEIGHT_FLOOR,
};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::operators::{partial_trace, BipartiteShape, DensityOperator, Side};

/// Eigenvalues below this are dropped when compressing onto a support.
const COMPRESS_THRESHOLD: f64 = 1e-12;

fn compress(m: &CMat) -> (CMat, CMat) {
    let eig = linalg::herm_eig(m);
    let (w, vals) = eig.support(COMPRESS_THRESHOLD * eig.max().max(1.0));
    (w, linalg::diag(&vals))
}

/// Add the block `[[D, Y], [Y†, R]] ⪰ 0` where `ρ = W D W†` and the
/// variable operator is `V R V†` (`V = 1` when `v` is `None`). Returns the
/// affine lower bound `Re Tr(W Y V†)` on the root fidelity `F(ρ, V R V†)`.
fn fidelity_block(lb: &mut LmiBuilder, rho: &CMat, v: Option<&CMat>, r: &MatExpr) -> Affine {
    let (w, d) = compress(rho);
    let y = lb.complex(d.nrows(), r.rows);
    let dm = MatExpr::constant(d);
    let ya = y.adjoint();
    lb.psd(MatExpr::block(&[vec![Some(&dm), Some(&y)], vec![Some(&ya), Some(r)]]));
    let coupling = match v {
        Some(v) => v.adjoint() * &w,
        None => w.clone(),
    };
    y.re_trace_with(&coupling)
}

fn check_radius(eps: f64) -> Result<()> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "smoothing radius must be ≥ 0, got {eps}"
        )));
    }
    Ok(())
}

fn fidelity_floor(eps: f64) -> f64 {
    (1.0 - eps * eps).max(0.0).sqrt()
}

/// Root fidelity `Tr√(√ρσ√ρ)` from the block SDP (no trace-deficit term).
pub fn fidelity_sdp(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let (v, e) = compress(sigma.matrix());
    if v.ncols() == 0 || compress(rho.matrix()).0.ncols() == 0 {
        return Ok(0.0);
    }
    let mut lb = LmiBuilder::new();
    let obj = fidelity_block(&mut lb, rho.matrix(), Some(&v), &MatExpr::constant(e));
    lb.minimize(obj.scale(-1.0));
    let sol = lb.solve()?;
    sol.require_optimal("fidelity SDP")?;
    Ok(-sol.value)
}

/// Smooth max-relative entropy `min_{ρ̃ ∈ B^ε(ρ)} D_max(ρ̃‖σ)`.
///
/// The ball contains subnormalized operators. At `ε = 0` this is
/// [`divergences::d_max`]; for `ε ≥ 1` the ball contains the zero operator
/// and the value is `−∞`.
pub fn smooth_d_max(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<f64> {
    check_radius(eps)?;
    if !rho.is_normalized() {
        return Err(Error::InvalidState("smooth_d_max expects a normalized rho".into()));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    if eps == 0.0 {
        return divergences::d_max(rho, sigma);
    }
    if eps >= 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let f = fidelity_floor(eps);
    let eig = sigma.eigen();
    let (v, vals) = eig.support(SUPPORT_THRESHOLD);
    let reach = linalg::re_trace(&(v.adjoint() * rho.matrix() * &v)).max(0.0).sqrt();
    if reach < f - 1e-12 {
        return Ok(f64::INFINITY);
    }
    let s = v.ncols();
    let e = linalg::diag(&vals);
    let mut lb = LmiBuilder::new();
    let mu = lb.scalar();
    let r = lb.hermitian(s);
    lb.psd(mu.as_matrix().kron_left(&e).sub(&r));
    lb.nonneg(Affine::constant(1.0).sub(&r.re_trace()));
    let fid = fidelity_block(&mut lb, rho.matrix(), Some(&v), &r);
    lb.nonneg(fid.plus(-f));
    lb.minimize(mu);
    let sol = lb.solve()?;
    sol.require_optimal("smooth D_max SDP")?;
    Ok(sol.value.max(0.0).log2())
}

/// Optimal `σ′` of a max-information SDP together with `log Tr σ′`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImaxWitness {
    pub value: f64,
    pub sigma_prime: CMat,
}

/// `log min{Tr σ′ : σ′ ⪰ S_i for all i}` and its minimizer.
fn dominating_trace(states: &[&CMat]) -> Result<ImaxWitness> {
    let d = states[0].nrows();
    let mut lb = LmiBuilder::new();
    let sp = lb.hermitian(d);
    for s in states {
        lb.psd(sp.sub(&MatExpr::constant((*s).clone())));
    }
    lb.minimize(sp.re_trace());
    let sol = lb.solve()?;
    sol.require_optimal("max-information SDP")?;
    Ok(ImaxWitness {
        value: sol.value.log2(),
        sigma_prime: linalg::hermitize(&sol.eval(&sp)),
    })
}

/// Max-information of `ρ_AB(p)`: `log min{Tr σ′ : σ′ ⪰ Q(x) for p_x > 0}`.
///
/// The weights cancel from `p_x Q(x) ⪯ p_x σ′`, so only the support of `p` matters.
pub fn i_max_cq_sdp(ensemble: &Ensemble) -> Result<ImaxWitness> {
    let w = ensemble.require_weights()?;
    let states: Vec<&CMat> = ensemble
        .states()
        .iter()
        .zip(w)
        .filter(|(_, p)| **p > WEIGHT_FLOOR)
        .map(|(s, _)| s.matrix())
        .collect();
    dominating_trace(&states)
}

/// Max-information `log min{Tr σ′ : ρ_A ⊗ σ′ ⪰ ρ_AB}` of a general bipartite state.
///
/// The constraint is compressed onto `supp ρ_A ⊗ H_B`.
pub fn i_max_sdp(rho_ab: &DensityOperator, shape: BipartiteShape) -> Result<ImaxWitness> {
    let rho_a = partial_trace(rho_ab, shape, Side::B)?;
    let db = shape.dim_b;
    let (w, da_c) = compress(rho_a.matrix());
    let wb = linalg::kron(&w, &linalg::eye(db));
    let rab = wb.adjoint() * rho_ab.matrix() * &wb;
    let mut lb = LmiBuilder::new();
    let sp = lb.hermitian(db);
    lb.psd(sp.kron_left(&da_c).sub(&MatExpr::constant(rab)));
    lb.minimize(sp.re_trace());
    let sol = lb.solve()?;
    sol.require_optimal("max-information SDP")?;
    Ok(ImaxWitness {
        value: sol.value.log2(),
        sigma_prime: linalg::hermitize(&sol.eval(&sp)),
    })
}

/// Search mode for [`smooth_i_max_cq`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmoothingMode {
    /// The smoothed CQ state keeps the marginal `p` on `A`.
    FixedMarginal,
    /// The marginal `q` on `A` is searched by Nelder–Mead around the
    /// fixed-marginal SDP.
    VariableMarginal,
}

/// Value and smoothed state of a smooth max-information computation.
///
/// The smoothed state is `Σ_x q_x |x⟩⟨x| ⊗ χ_x` with `χ_x ⪯ τ`, and
/// `value = log Tr τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothImax {
    pub value: f64,
    pub mode: SmoothingMode,
    pub q: Vec<f64>,
    /// Unit-trace conditionals `χ_x` (entries for `q_x = 0` are unconstrained).
    pub conditionals: Vec<CMat>,
    pub tau: CMat,
    /// `Σ_x √(p_x q_x) F(Q(x), χ_x)` at the returned state.
    pub fidelity: f64,
}

/// Fixed-`q` inner problem: `min Tr τ` s.t. `τ ⪰ χ_x`, `Tr χ_x = 1`,
/// `Σ_x w_x F(Q(x), χ_x) ≥ f` with `w_x = √(p_x q_x)`.
fn smooth_i_max_inner(ensemble: &Ensemble, q: &[f64], f: f64) -> Result<Option<SmoothImax>> {
    let p = ensemble.require_weights()?;
    let d = ensemble.dim();
    let wts: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a * b).max(0.0).sqrt()).collect();
    let active: Vec<usize> = (0..p.len()).filter(|&x| q[x] > WEIGHT_FLOOR).collect();
    let reach: f64 = active.iter().map(|&x| wts[x]).sum();
    if reach <= f + 1e-9 {
        return Ok(None);
    }
    let mut lb = LmiBuilder::new();
    let tau = lb.hermitian(d);
    let mut chis = Vec::with_capacity(active.len());
    let mut fid = Affine::constant(0.0);
    for &x in &active {
        let chi = lb.hermitian_with_trace(d, 1.0);
        lb.psd(tau.sub(&chi));
        if wts[x] > WEIGHT_FLOOR {
            let fx = fidelity_block(&mut lb, ensemble.states()[x].matrix(), None, &chi);
            fid = fid.add(&fx.scale(wts[x]));
        } else {
            lb.psd(chi.clone());
        }
        chis.push(chi);
    }
    lb.nonneg(fid.plus(-f));
    lb.minimize(tau.re_trace());
    let sol = lb.solve()?;
    sol.require_optimal("smooth max-information SDP")?;
    let tau_m = linalg::hermitize(&sol.eval(&tau));
    let mut conditionals = vec![tau_m.clone() / c(linalg::re_trace(&tau_m)); p.len()];
    for (k, &x) in active.iter().enumerate() {
        conditionals[x] = linalg::hermitize(&sol.eval(&chis[k]));
    }
    Ok(Some(SmoothImax {
        value: sol.value.log2(),
        mode: SmoothingMode::FixedMarginal,
        q: q.to_vec(),
        conditionals,
        tau: tau_m,
        fidelity: sol.eval_affine(&fid),
    }))
}

/// Smooth max-information `I_max^ε(A:B)` of `ρ_AB(p)` over CQ smoothed states.
///
/// Both modes return upper estimates of the smooth max-information, with
/// `FixedMarginal ≥ VariableMarginal`.
pub fn smooth_i_max_cq(ensemble: &Ensemble, eps: f64, mode: SmoothingMode) -> Result<SmoothImax> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0,1), got {eps}")));
    }
    let p = ensemble.require_weights()?.to_vec();
    if eps == 0.0 {
        let wit = i_max_cq_sdp(ensemble)?;
        let tr = linalg::re_trace(&wit.sigma_prime);
        let conditionals = ensemble
            .states()
            .iter()
            .zip(&p)
            .map(|(s, &px)| {
                if px > WEIGHT_FLOOR {
                    s.matrix().clone()
                } else {
                    &wit.sigma_prime / c(tr)
                }
            })
            .collect();
        return Ok(SmoothImax {
            value: wit.value,
            mode,
            q: p,
            conditionals,
            tau: wit.sigma_prime,
            fidelity: 1.0,
        });
    }
    let f = fidelity_floor(eps);
    let fixed = smooth_i_max_inner(ensemble, &p, f)?
        .ok_or_else(|| Error::SolverFailure("fixed-marginal problem has no interior".into()))?;
    match mode {
        SmoothingMode::FixedMarginal => Ok(fixed),
        SmoothingMode::VariableMarginal => variable_marginal(ensemble, f, fixed),
    }
}

struct MarginalSearch<'a> {
    ensemble: &'a Ensemble,
    f: f64,
    penalty: f64,
    best: RefCell<SmoothImax>,
}

fn q_from(y: &[f64]) -> Vec<f64> {
    let total: f64 = y.iter().map(|v| v * v).sum();
    if total <= 0.0 {
        return vec![1.0 / y.len() as f64; y.len()];
    }
    y.iter().map(|v| v * v / total).collect()
}

impl CostFunction for MarginalSearch<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, y: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let q = q_from(y);
        match smooth_i_max_inner(self.ensemble, &q, self.f) {
            Ok(Some(mut s)) => {
                s.mode = SmoothingMode::VariableMarginal;
                let v = s.value;
                if v < self.best.borrow().value {
                    *self.best.borrow_mut() = s;
                }
                Ok(v)
            }
            _ => Ok(self.penalty),
        }
    }
}

/// Outer search evaluations per symbol in variable-marginal mode.
const NM_ITERS_PER_SYMBOL: u64 = 40;

fn variable_marginal(ensemble: &Ensemble, f: f64, fixed: SmoothImax) -> Result<SmoothImax> {
    let n = ensemble.len();
    let mut start = fixed.clone();
    start.mode = SmoothingMode::VariableMarginal;
    if n == 1 {
        return Ok(start);
    }
    let y0: Vec<f64> = fixed.q.iter().map(|v| v.sqrt()).collect();
    let mut simplex = vec![y0.clone()];
    for i in 0..n {
        let mut y = y0.clone();
        y[i] = if y[i] > 0.5 { y[i] - 0.25 } else { y[i] + 0.25 };
        simplex.push(y);
    }
    let problem = MarginalSearch {
        ensemble,
        f,
        penalty: fixed.value + 64.0,
        best: RefCell::new(start),
    };
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-7)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    let best = {
        let run = Executor::new(&problem, solver)
            .configure(|s| s.max_iters(NM_ITERS_PER_SYMBOL * n as u64))
            .run();
        if let Err(e) = run {
            return Err(Error::NonConvergence {
                what: format!("variable-marginal search: {e}"),
                iterations: (NM_ITERS_PER_SYMBOL * n as u64) as usize,
                residual: f64::NAN,
            });
        }
        problem.best.borrow().clone()
    };
    Ok(best)
}

impl CostFunction for &MarginalSearch<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, y: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        (*self).cost(y)
    }
}

/// Witnesses of [`min_max_radius`]: `σ′ ⪰ ω_x` with `F(Q(x), ω_x) ≥ √(1−δ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxRadius {
    /// `log Tr σ′`; equals `min_σ max_x D_max^δ(Q(x)‖σ)`.
    pub value: f64,
    pub omegas: Vec<CMat>,
    pub sigma_prime: CMat,
}

/// `min_σ max_x D_max^δ(Q(x)‖σ)` for every member of the ensemble (weights ignored).
///
/// For `δ ≥ 1` every ball contains the zero operator and the value is `−∞`.
pub fn min_max_radius(ensemble: &Ensemble, delta: f64) -> Result<MinMaxRadius> {
    check_radius(delta)?;
    let states: Vec<&CMat> = ensemble.states().iter().map(|s| s.matrix()).collect();
    if delta == 0.0 {
        let wit = dominating_trace(&states)?;
        return Ok(MinMaxRadius {
            value: wit.value,
            omegas: states.into_iter().cloned().collect(),
            sigma_prime: wit.sigma_prime,
        });
    }
    let d = ensemble.dim();
    if delta >= 1.0 {
        return Ok(MinMaxRadius {
            value: f64::NEG_INFINITY,
            omegas: vec![CMat::zeros(d, d); states.len()],
            sigma_prime: CMat::zeros(d, d),
        });
    }
    let f = fidelity_floor(delta);
    let mut lb = LmiBuilder::new();
    let sp = lb.hermitian(d);
    let mut omegas = Vec::with_capacity(states.len());
    for s in &states {
        let om = lb.hermitian(d);
        lb.psd(sp.sub(&om));
        lb.nonneg(Affine::constant(1.0).sub(&om.re_trace()));
        let fx = fidelity_block(&mut lb, s, None, &om);
        lb.nonneg(fx.plus(-f));
        omegas.push(om);
    }
    lb.minimize(sp.re_trace());
    let sol = lb.solve()?;
    sol.require_optimal("min-max radius SDP")?;
    Ok(MinMaxRadius {
        value: sol.value.max(0.0).log2(),
        omegas: omegas.iter().map(|o| linalg::psd_part(&sol.eval(o))).collect(),
        sigma_prime: linalg::hermitize(&sol.eval(&sp)),
    })
}

fn herm_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut m = CMat::zeros(n, n);
        m[(i, i)] = c(1.0);
        out.push(m);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut re = CMat::zeros(n, n);
            re[(i, j)] = c(1.0);
            re[(j, i)] = c(1.0);
            out.push(re);
            let mut im = CMat::zeros(n, n);
            im[(i, j)] = C64::new(0.0, 1.0);
            im[(j, i)] = C64::new(0.0, -1.0);
            out.push(im);
        }
    }
    out
}

fn traceless_basis(n: usize) -> Vec<CMat> {
    let mut out = herm_basis(n);
    let last = out[n - 1].clone();
    out.remove(n - 1);
    for m in out.iter_mut().take(n - 1) {
        *m -= &last;
    }
    out
}

/// Smooth max-information of a general bipartite state with the `A` marginal held fixed.
///
/// Minimizes `Tr σ′` over `ρ̃_AB ⪯ ρ_A ⊗ σ′` with `Tr_B ρ̃ = ρ_A` and
/// `F(ρ_AB, ρ̃_AB) ≥ √(1−ε²)`; fixing the marginal makes this an upper
/// estimate of the smooth max-information.
pub fn smooth_i_max_general(rho_ab: &DensityOperator, shape: BipartiteShape, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0,1), got {eps}")));
    }
    if eps == 0.0 {
        return i_max_sdp(rho_ab, shape).map(|w| w.value);
    }
    let rho_a = partial_trace(rho_ab, shape, Side::B)?;
    let db = shape.dim_b;
    let (w, ra) = compress(rho_a.matrix());
    let r = w.ncols();
    let wb = linalg::kron(&w, &linalg::eye(db));
    let rab = linalg::hermitize(&(wb.adjoint() * rho_ab.matrix() * &wb));
    let mut lb = LmiBuilder::new();
    let mut tilde = MatExpr::constant(linalg::kron(&ra, &(linalg::eye(db) / c(db as f64))));
    for ha in herm_basis(r) {
        for tb in traceless_basis(db) {
            let k = lb.scalar().terms[0].0;
            let m = linalg::kron(&ha, &tb);
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if m[(i, j)] != C64::new(0.0, 0.0) {
                        tilde.terms.push((k, i, j, m[(i, j)]));
                    }
                }
            }
        }
    }
    let sp = lb.hermitian(db);
    lb.psd(sp.kron_left(&ra).sub(&tilde));
    let fid = fidelity_block(&mut lb, &rab, None, &tilde);
    lb.nonneg(fid.plus(-fidelity_floor(eps)));
    lb.minimize(sp.re_trace());
    let sol = lb.solve()?;
    sol.require_optimal("general smooth max-information SDP")?;
    Ok(sol.value.log2())
}

/// One evaluation of the finite-`n` equipartition sandwich.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaepRecord {
    pub n: usize,
    pub eps: f64,
    pub mutual_information: f64,
    /// `I − (3/n) H(ε) − 2ε log(|A||B|)`; absent when `n < 2(1−ε²)`.
    pub lhs_lb: Option<f64>,
    /// `(1/n) I_max^ε(A:B)` of `ρ^{⊗n}` (fixed-marginal estimate).
    pub value: f64,
    /// `I + ξ(ε)/√n − (2/n) log(ε²/24)`.
    pub rhs_ub: f64,
    pub holds: bool,
    pub cq: bool,
}

/// `ξ(ε) = 8 √(13 − 4 log ε) (2 + ½ log|A|)`.
pub fn qaep_xi(eps: f64, dim_a: usize) -> f64 {
    8.0 * (13.0 - 4.0 * eps.log2()).sqrt() * (2.0 + 0.5 * (dim_a as f64).log2())
}

/// Compare `(1/n) I_max^ε(A:B)_{ρ^{⊗n}}` against the two equipartition bound lines.
pub fn qaep_check(rho_ab: &DensityOperator, shape: BipartiteShape, n: usize, eps: f64) -> Result<QaepRecord> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidParameter(format!("n must be 1 or 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    let info = mutual_information(rho_ab, shape)?;
    let (da, db) = (shape.dim_a, shape.dim_b);
    let cq = CqState::from_density(rho_ab, shape)?;
    let is_cq = cq.is_some();
    let total = match cq {
        Some(cq) => {
            let e = cq.ensemble()?;
            let en = if n == 2 { e.tensor(&e)? } else { e };
            smooth_i_max_cq(&en, eps, SmoothingMode::FixedMarginal)?.value
        }
        None => {
            let (big, sh) = if n == 2 {
                (reorder_square(rho_ab, shape)?, BipartiteShape::new(da * da, db * db))
            } else {
                (rho_ab.clone(), shape)
            };
            if sh.dim() > 128 {
                return Err(Error::DimensionBlowup {
                    dim: sh.dim(),
                    cap: 128,
                });
            }
            smooth_i_max_general(&big, sh, eps)?
        }
    };
    let nf = n as f64;
    let value = total / nf;
    let lhs_lb = (nf >= 2.0 * (1.0 - eps * eps))
        .then(|| info - 3.0 / nf * binary_entropy(eps) - 2.0 * eps * ((da * db) as f64).log2());
    let rhs_ub = info + qaep_xi(eps, da) / nf.sqrt() - 2.0 / nf * (eps * eps / 24.0).log2();
    let holds = lhs_lb.is_none_or(|l| l <= value + 1e-3) && value <= rhs_ub + 1e-3;
    Ok(QaepRecord {
        n,
        eps,
        mutual_information: info,
        lhs_lb,
        value,
        rhs_ub,
        holds,
        cq: is_cq,
    })
}

/// `ρ_{AB} ⊗ ρ_{AB}` with registers ordered `A A B B`.
fn reorder_square(rho: &DensityOperator, shape: BipartiteShape) -> Result<DensityOperator> {
    let (da, db) = (shape.dim_a, shape.dim_b);
    let two = rho.tensor(rho);
    let n = two.dim();
    let idx = |a1: usize, b1: usize, a2: usize, b2: usize| ((a1 * db + b1) * da + a2) * db + b2;
    let mut perm = vec![0usize; n];
    for a1 in 0..da {
        for a2 in 0..da {
            for b1 in 0..db {
                for b2 in 0..db {
                    perm[((a1 * da + a2) * db + b1) * db + b2] = idx(a1, b1, a2, b2);
                }
            }
        }
    }
    let m = two.matrix();
    let out = CMat::from_fn(n, n, |i, j| m[(perm[i], perm[j])]);
    DensityOperator::new(out)
}
