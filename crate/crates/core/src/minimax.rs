//! The convex–concave testing game `min_p max_σ β^λ(ρ_AB(p) ‖ ρ_A(p) ⊗ σ)`
//! and the worst-case lower bound on the communication cost.
//!
//! Optimal tests for CQ hypotheses can be taken block diagonal, so with
//! `R_x = p_x Q^x` the game value is
//!
//! ```text
//! min_p max_σ β = min { s : s·1 ⪰ Σ_x R_x, 0 ⪯ R_x ⪯ p_x 1, Σ_x ⟨R_x, Q(x)⟩ ≥ 1−λ }
//! ```
//!
//! whose Lagrange multiplier on `s·1 ⪰ Σ_x R_x` is an optimal `σ`. The
//! reversed order `max_σ min_p` is the dual program
//! `max μ(1−λ) − t` over `σ − μQ(x) + W_x ⪰ 0`, `W_x ⪰ 0`, `t ≥ Tr W_x`.
//! Both players' best responses are exact SDPs, and the duality gap between
//! them certifies the returned pair.

use crate::divergences::Ensemble;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::operators::{DensityOperator, StateKind};
use crate::smoothing::{min_max_radius, Affine, LmiBuilder, MatExpr};

/// Default certificate tolerance of [`solve_saddle`].
pub const DEFAULT_TOL: f64 = 1e-4;

/// Saddle point of the testing game with its duality-gap certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleResult {
    /// `min_p max_σ β^λ`.
    pub value: f64,
    pub p_star: Vec<f64>,
    pub sigma_star: DensityOperator,
    /// `max_σ β(p*, σ) − min_p β(p, σ*)`.
    pub gap: f64,
    /// Fictitious-play rounds used after the initial solve.
    pub rounds: usize,
}

impl SaddleResult {
    /// `D_h^λ` corresponding to the game value: `−log(β/(1−λ))`.
    pub fn d_h(&self, lambda: f64) -> f64 {
        crate::hypothesis::d_h_from_beta(self.value, lambda)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in [0,1), got {lambda}"
        )));
    }
    Ok(())
}

fn support_projector(m: &CMat) -> CMat {
    let (v, _) = linalg::herm_eig(m).support(1e-12);
    &v * v.adjoint()
}

/// Simplex variables `p_0 … p_{n−2}` with `p_{n−1} = 1 − Σ`, constrained nonnegative.
fn simplex(lb: &mut LmiBuilder, n: usize) -> Vec<Affine> {
    let mut p: Vec<Affine> = (0..n - 1).map(|_| lb.scalar()).collect();
    let mut last = Affine::constant(1.0);
    for v in &p {
        last = last.sub(v);
    }
    p.push(last);
    for v in &p {
        lb.nonneg(v.clone());
    }
    p
}

fn normalized_state(m: &CMat) -> Result<DensityOperator> {
    DensityOperator::from_numerical(m, StateKind::Normalized)
}

/// `β^λ(ρ_AB(p) ‖ ρ_A(p) ⊗ σ)` for fixed `p` and `σ`, from the block-diagonal test.
pub fn game_payoff(ensemble: &Ensemble, lambda: f64, p: &[f64], sigma: &DensityOperator) -> Result<f64> {
    check_lambda(lambda)?;
    let e = ensemble.with_weights(p.to_vec())?;
    let rho = e.cq_state()?.to_density()?;
    let mut blocks = Vec::new();
    for &w in p {
        blocks.push((w, sigma.clone()));
    }
    let prod = crate::divergences::CqState::new(blocks)?.to_density()?;
    Ok(crate::hypothesis::beta_eps(&rho, &prod, lambda)?.0)
}

/// Best response of the `σ` player: `max_σ β(p, σ)` and a maximizer.
pub fn best_sigma(ensemble: &Ensemble, lambda: f64, p: &[f64]) -> Result<(f64, DensityOperator)> {
    check_lambda(lambda)?;
    let d = ensemble.dim();
    let active: Vec<usize> = (0..p.len()).filter(|&x| p[x] > 0.0).collect();
    if lambda == 0.0 {
        let mut m = CMat::zeros(d, d);
        for &x in &active {
            m += support_projector(ensemble.states()[x].matrix()) * c(p[x]);
        }
        let eig = linalg::herm_eig(&m);
        let top = eig.vectors.column(d - 1).into_owned();
        return Ok((eig.max(), normalized_state(&linalg::outer(&top))?));
    }
    let mut lb = LmiBuilder::new();
    let s = lb.scalar();
    let mut sum = MatExpr::zeros(d, d);
    let mut overlap = Affine::constant(0.0);
    for &x in &active {
        let r = lb.hermitian(d);
        lb.psd(r.clone());
        lb.psd(MatExpr::constant(linalg::eye(d) * c(p[x])).sub(&r));
        overlap = overlap.add(&r.re_trace_with(ensemble.states()[x].matrix()));
        sum = sum.add(&r);
    }
    let top = lb.psd(s.as_matrix().kron_left(&linalg::eye(d)).sub(&sum));
    lb.nonneg(overlap.plus(-(1.0 - lambda)));
    lb.minimize(s);
    let sol = lb.solve()?;
    sol.require_optimal("sigma best response")?;
    Ok((sol.value, normalized_state(&sol.multipliers[top])?))
}

/// Best response of the `p` player: `min_p β(p, σ)` and a minimizer.
pub fn best_p(ensemble: &Ensemble, lambda: f64, sigma: &DensityOperator) -> Result<(f64, Vec<f64>)> {
    check_lambda(lambda)?;
    let n = ensemble.len();
    let d = ensemble.dim();
    if lambda == 0.0 {
        let costs: Vec<f64> = ensemble
            .states()
            .iter()
            .map(|s| linalg::re_trace_prod(&support_projector(s.matrix()), sigma.matrix()))
            .collect();
        let (arg, v) = costs
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let mut p = vec![0.0; n];
        p[arg] = 1.0;
        return Ok((v, p));
    }
    if n == 1 {
        return Ok((game_payoff(ensemble, lambda, &[1.0], sigma)?, vec![1.0]));
    }
    let mut lb = LmiBuilder::new();
    let p = simplex(&mut lb, n);
    let mut cost = Affine::constant(0.0);
    let mut overlap = Affine::constant(0.0);
    for (x, px) in p.iter().enumerate() {
        let r = lb.hermitian(d);
        lb.psd(r.clone());
        lb.psd(px.as_matrix().kron_left(&linalg::eye(d)).sub(&r));
        overlap = overlap.add(&r.re_trace_with(ensemble.states()[x].matrix()));
        cost = cost.add(&r.re_trace_with(sigma.matrix()));
    }
    lb.nonneg(overlap.plus(-(1.0 - lambda)));
    lb.minimize(cost);
    let sol = lb.solve()?;
    sol.require_optimal("p best response")?;
    Ok((
        sol.value.max(0.0),
        project_simplex(&p.iter().map(|a| sol.eval_affine(a)).collect::<Vec<_>>()),
    ))
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// `min_p max_σ β` and the optimal `p`, `σ` from a single SDP.
fn joint_min_max(ensemble: &Ensemble, lambda: f64) -> Result<(f64, Vec<f64>, DensityOperator)> {
    let n = ensemble.len();
    let d = ensemble.dim();
    if n == 1 {
        let (v, s) = best_sigma(ensemble, lambda, &[1.0])?;
        return Ok((v, vec![1.0], s));
    }
    let mut lb = LmiBuilder::new();
    let s = lb.scalar();
    let p = simplex(&mut lb, n);
    let mut sum = MatExpr::zeros(d, d);
    let mut overlap = Affine::constant(0.0);
    for (x, px) in p.iter().enumerate() {
        let proj = support_projector(ensemble.states()[x].matrix());
        let r = if lambda == 0.0 {
            px.as_matrix().kron_left(&proj)
        } else {
            let r = lb.hermitian(d);
            lb.psd(r.clone());
            lb.psd(px.as_matrix().kron_left(&linalg::eye(d)).sub(&r));
            overlap = overlap.add(&r.re_trace_with(ensemble.states()[x].matrix()));
            r
        };
        sum = sum.add(&r);
    }
    let top = lb.psd(s.as_matrix().kron_left(&linalg::eye(d)).sub(&sum));
    if lambda > 0.0 {
        lb.nonneg(overlap.plus(-(1.0 - lambda)));
    }
    lb.minimize(s);
    let sol = lb.solve()?;
    sol.require_optimal("min-max game SDP")?;
    let pv = project_simplex(&p.iter().map(|a| sol.eval_affine(a)).collect::<Vec<_>>());
    Ok((sol.value, pv, normalized_state(&sol.multipliers[top])?))
}

/// `max_σ min_p β^λ`, solved as the dual program of the inner minimization.
pub fn max_min_value(ensemble: &Ensemble, lambda: f64) -> Result<(f64, DensityOperator)> {
    check_lambda(lambda)?;
    let d = ensemble.dim();
    let mut lb = LmiBuilder::new();
    let sigma = lb.hermitian_with_trace(d, 1.0);
    lb.psd(sigma.clone());
    let mu = lb.scalar();
    lb.nonneg(mu.clone());
    let t = lb.scalar();
    for s in ensemble.states() {
        let w = lb.hermitian(d);
        lb.psd(w.clone());
        lb.psd(sigma.sub(&mu.as_matrix().kron_left(s.matrix())).add(&w));
        lb.nonneg(t.sub(&w.re_trace()));
    }
    lb.minimize(t.sub(&mu.scale(1.0 - lambda)));
    let sol = lb.solve()?;
    sol.require_optimal("max-min game SDP")?;
    Ok((-sol.value, normalized_state(&sol.eval(&sigma))?))
}

/// Solve `min_p max_σ β^λ(ρ_AB(p) ‖ ρ_A(p) ⊗ σ)` with a duality-gap certificate.
///
/// The joint SDP gives a candidate `(p*, σ*)`; the certificate is
/// `max_σ β(p*, σ) − min_p β(p, σ*)`. While it exceeds `tol`, fictitious
/// play averages exact best responses of both players.
pub fn solve_saddle(ensemble: &Ensemble, lambda: f64, tol: f64, max_rounds: usize) -> Result<SaddleResult> {
    check_lambda(lambda)?;
    let (value, p0, s0) = joint_min_max(ensemble, lambda)?;
    let mut p_bar = p0;
    let mut s_bar = s0;
    let mut best: Option<SaddleResult> = None;
    for round in 0..=max_rounds {
        let (upper, s_br) = best_sigma(ensemble, lambda, &p_bar)?;
        let (lower, p_br) = best_p(ensemble, lambda, &s_bar)?;
        let gap = (upper - lower).max(0.0);
        if best.as_ref().is_none_or(|b| gap < b.gap) {
            best = Some(SaddleResult {
                value: if round == 0 { value } else { upper },
                p_star: p_bar.clone(),
                sigma_star: s_bar.clone(),
                gap,
                rounds: round,
            });
        }
        if gap <= tol {
            break;
        }
        let k = (round + 2) as f64;
        p_bar = p_bar
            .iter()
            .zip(&p_br)
            .map(|(a, b)| a * (1.0 - 1.0 / k) + b / k)
            .collect();
        s_bar = normalized_state(&(s_bar.matrix() * c(1.0 - 1.0 / k) + s_br.matrix() * c(1.0 / k)))?;
    }
    let best = best.expect("at least one round runs");
    if best.gap > tol {
        return Err(Error::NonConvergence {
            what: "saddle-point certificate".into(),
            iterations: max_rounds,
            residual: best.gap,
        });
    }
    Ok(best)
}

/// `f(ε, δ) = log((1−ε²)(ε²+δ)/δ³) + 3 log 3`.
pub fn lower_bound_correction(eps: f64, delta: f64) -> f64 {
    let e2 = eps * eps;
    ((1.0 - e2) * (e2 + delta) / delta.powi(3)).log2() + 3.0 * 3f64.log2()
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1], got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0 - eps * eps) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1−ε²), got {delta}"
        )));
    }
    Ok(())
}

/// Worst-case lower bound `min_σ max_x D_max^γ(Q(x)‖σ) − f(ε, δ)` with `γ = √(2(ε²+δ))`.
///
/// When `γ ≥ 1` every smoothing ball contains the zero operator and the
/// bound is `−∞`.
pub fn worst_case_lower_bound(ensemble: &Ensemble, eps: f64, delta: f64) -> Result<f64> {
    check_eps_delta(eps, delta)?;
    let gamma = (2.0 * (eps * eps + delta)).sqrt();
    let radius = min_max_radius(ensemble, gamma)?.value;
    Ok(radius - lower_bound_correction(eps, delta))
}

/// The intermediate game bound `−log(min_p max_σ β^λ) + log(1−λ) − f(ε, δ)`
/// with `λ = 1 − ε² − δ`, which also lower-bounds the worst-case cost.
pub fn game_lower_bound(ensemble: &Ensemble, eps: f64, delta: f64) -> Result<f64> {
    check_eps_delta(eps, delta)?;
    let lambda = 1.0 - eps * eps - delta;
    let s = solve_saddle(ensemble, lambda, DEFAULT_TOL, 50)?;
    Ok(s.d_h(lambda) - lower_bound_correction(eps, delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orth2() -> Ensemble {
        Ensemble::from_states(vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)]).unwrap()
    }

    #[test]
    fn identical_states() {
        let s = DensityOperator::from_diagonal(&[0.3, 0.7]).unwrap();
        let e = Ensemble::from_states(vec![s.clone(), s]).unwrap();
        let r = solve_saddle(&e, 0.2, 1e-6, 10).unwrap();
        assert!((r.value - 0.8).abs() < 1e-6, "{}", r.value);
        assert!(r.d_h(0.2).abs() < 1e-6);
    }

    #[test]
    fn orthogonal_pair() {
        for lambda in [0.0, 0.3, 0.6] {
            let r = solve_saddle(&orth2(), lambda, 1e-6, 10).unwrap();
            assert!((r.value - (1.0 - lambda) / 2.0).abs() < 1e-6, "{lambda}: {}", r.value);
            assert!((r.d_h(lambda) - 1.0).abs() < 1e-5);
            assert!((r.p_star[0] - 0.5).abs() < 1e-4);
            let (mm, _) = max_min_value(&orth2(), lambda).unwrap();
            assert!((mm - r.value).abs() < 1e-6);
        }
    }

    #[test]
    fn single_state() {
        let e = Ensemble::from_states(vec![DensityOperator::basis(2, 0)]).unwrap();
        let r = solve_saddle(&e, 0.4, 1e-6, 10).unwrap();
        assert!(r.d_h(0.4).abs() < 1e-6);
    }

    #[test]
    fn correction_arithmetic() {
        let v = lower_bound_correction(0.1, 0.5);
        let expected = (0.99f64 * 0.51 / 0.125).log2() + 3.0 * 3f64.log2();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 6.77).abs() < 0.01);
    }

    #[test]
    fn lower_bound_examples() {
        let e = Ensemble::from_states(vec![DensityOperator::basis(2, 0)]).unwrap();
        let v = worst_case_lower_bound(&e, 0.1, 0.4).unwrap();
        let radius = (1.0f64 - 2.0 * (0.01 + 0.4)).log2();
        assert!((v - radius + lower_bound_correction(0.1, 0.4)).abs() < 1e-6, "{v}");
        let w = worst_case_lower_bound(&orth2(), 0.1, 0.4).unwrap();
        assert!(w < 1.0);
        let g = worst_case_lower_bound(&orth2(), 0.1, 0.495).unwrap();
        assert!(g.is_infinite() && g < 0.0);
    }
}
