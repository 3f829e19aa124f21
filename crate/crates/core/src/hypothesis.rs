//! Quantum hypothesis testing: the optimal type-II error `β^ε(ρ‖σ)`, the
//! hypothesis-testing relative entropy `D_h^ε`, and the interval that links
//! `D_h` to smooth `D_max`.
//!
//! `β^ε` is computed from the Neyman–Pearson structure of the optimal test:
//! `Q = P_{>}(ρ − tσ) + μ P_{=}(ρ − tσ)` with the threshold `t` found by
//! bisection and `μ` chosen so that `⟨Q,ρ⟩ = 1 − ε` holds with equality.

use serde::{Deserialize, Serialize};

use crate::divergences::d_max;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::operators::DensityOperator;
use crate::smoothing::{LmiBuilder, MatExpr};

/// Values of `β` below this are reported as exactly zero.
pub const BETA_FLOOR: f64 = 1e-14;

const BISECTION_CAP: usize = 200;

/// A test `0 ⪯ Q ⪯ 1` with its acceptance probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOperator {
    pub matrix: CMat,
    /// `⟨Q, ρ⟩`.
    pub alpha: f64,
    /// `⟨Q, σ⟩`.
    pub beta: f64,
}

/// Result of [`dmax_dh_bridge`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeInterval {
    /// `D_h^{ε−δ} − log(ε(1−ε+δ)/δ³) − 3 log 3`, a lower bound on `D_max^{√(1−ε)}`.
    pub lower: f64,
    /// `D_h^ε`, an upper bound on `D_max^{√(2(1−ε))}`.
    pub upper: f64,
}

fn check_pair(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    if !rho.is_normalized() || !sigma.is_normalized() {
        return Err(Error::InvalidState(
            "hypothesis testing expects normalized states".into(),
        ));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0,1), got {eps}")));
    }
    Ok(())
}

struct Split {
    above: CMat,
    level: CMat,
    alpha_above: f64,
    alpha_level: f64,
}

/// Projectors onto the positive and (numerically) zero eigenspaces of `ρ − tσ`.
fn split(rho: &CMat, sigma: &CMat, t: f64) -> Split {
    let d = rho.nrows();
    let eig = linalg::herm_eig(&(rho - sigma * c(t)));
    let window = 1e-11 * (1.0 + t);
    let mut above = CMat::zeros(d, d);
    let mut level = CMat::zeros(d, d);
    for (i, &v) in eig.values.iter().enumerate() {
        let col = eig.vectors.column(i);
        let proj = col * col.adjoint();
        if v > window {
            above += proj;
        } else if v >= -window {
            level += proj;
        }
    }
    let alpha_above = linalg::re_trace_prod(&above, rho);
    let alpha_level = linalg::re_trace_prod(&level, rho);
    Split {
        above,
        level,
        alpha_above,
        alpha_level,
    }
}

fn assemble(rho: &CMat, sigma: &CMat, target: f64, s: &Split) -> Option<TestOperator> {
    let lo = s.alpha_above;
    let hi = s.alpha_above + s.alpha_level;
    let slack = 1e-10;
    if target < lo - slack || target > hi + slack {
        return None;
    }
    let mu = if target - lo <= 1e-13 || s.alpha_level <= 1e-13 {
        0.0
    } else {
        ((target - lo) / s.alpha_level).clamp(0.0, 1.0)
    };
    let q = linalg::hermitize(&(&s.above + &s.level * c(mu)));
    let alpha = linalg::re_trace_prod(&q, rho);
    let beta = linalg::re_trace_prod(&q, sigma).max(0.0);
    Some(TestOperator { matrix: q, alpha, beta })
}

/// Optimal type-II error `β^ε(ρ‖σ) = min{⟨Q,σ⟩ : 0 ⪯ Q ⪯ 1, ⟨Q,ρ⟩ ≥ 1−ε}` and an optimal test.
pub fn beta_eps(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<(f64, TestOperator)> {
    check_pair(rho, sigma)?;
    check_eps(eps)?;
    let (r, s) = (rho.matrix(), sigma.matrix());
    let target = 1.0 - eps;

    // α_>(t) = ⟨P_{>}(ρ − tσ), ρ⟩ is nonincreasing; find the smallest t with α_>(t) ≤ 1−ε.
    let at_zero = split(r, s, 0.0);
    if at_zero.alpha_above <= target + 1e-12 {
        if let Some(q) = assemble(r, s, target, &at_zero) {
            return Ok(finish(q));
        }
    }
    let mut hi = match d_max(rho, sigma)? {
        v if v.is_finite() => 2f64.powf(v) * (1.0 + 1e-9) + 1e-12,
        _ => {
            let mut t = 1.0;
            while split(r, s, t).alpha_above > target && t < 1e300 {
                t *= 16.0;
            }
            t
        }
    };
    if split(r, s, hi).alpha_above > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    let mut iters = 0;
    while iters < BISECTION_CAP && hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        let sp = split(r, s, mid);
        if (sp.alpha_above - target).abs() <= 1e-13 && sp.alpha_level <= 1e-13 {
            if let Some(q) = assemble(r, s, target, &sp) {
                return Ok(finish(q));
            }
        }
        if sp.alpha_above > target {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    for t in [0.5 * (lo + hi), hi, lo] {
        if let Some(q) = assemble(r, s, target, &split(r, s, t)) {
            return Ok(finish(q));
        }
    }
    // Pathological clustering: fall back to the SDP formulation.
    let (beta, q) = beta_eps_sdp_with_test(rho, sigma, eps)?;
    let alpha = linalg::re_trace_prod(&q, r);
    Ok(finish(TestOperator { matrix: q, alpha, beta }))
}

fn finish(mut q: TestOperator) -> (f64, TestOperator) {
    if q.beta < BETA_FLOOR {
        q.beta = 0.0;
    }
    (q.beta, q)
}

/// `β^ε(ρ‖σ)` by solving the testing SDP directly with the interior-point kernel.
///
/// At `ε = 0` the constraint `⟨Q,ρ⟩ ≥ 1` forces `Q = Π_ρ ⊕ Q'` on `supp ρ ⊕ ker ρ`;
/// the SDP is then posed for `Q'` on `ker ρ` only.
pub fn beta_eps_sdp(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<f64> {
    Ok(beta_eps_sdp_with_test(rho, sigma, eps)?.0)
}

fn beta_eps_sdp_with_test(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<(f64, CMat)> {
    check_pair(rho, sigma)?;
    check_eps(eps)?;
    let d = rho.dim();
    if eps == 0.0 {
        let eig = rho.eigen();
        let (supp, _) = eig.support(1e-12);
        let pi = &supp * supp.adjoint();
        let base = linalg::re_trace_prod(&pi, sigma.matrix());
        let k = d - supp.ncols();
        if k == 0 {
            return Ok((base, pi));
        }
        let mut kern = CMat::zeros(d, k);
        let mut col = 0;
        for i in 0..d {
            if eig.values[i] <= 1e-12 {
                kern.set_column(col, &eig.vectors.column(i));
                col += 1;
            }
        }
        let sk = kern.adjoint() * sigma.matrix() * &kern;
        let mut lb = LmiBuilder::new();
        let q = lb.hermitian(k);
        lb.psd(q.clone());
        lb.psd(MatExpr::constant(linalg::eye(k)).sub(&q));
        lb.minimize(q.re_trace_with(&sk));
        let sol = lb.solve()?;
        sol.require_optimal("beta SDP")?;
        let qk = sol.eval(&q);
        return Ok((base + sol.value, pi + &kern * qk * kern.adjoint()));
    }
    let mut lb = LmiBuilder::new();
    let q = lb.hermitian(d);
    lb.psd(q.clone());
    lb.psd(MatExpr::constant(linalg::eye(d)).sub(&q));
    lb.nonneg(q.re_trace_with(rho.matrix()).plus(-(1.0 - eps)));
    lb.minimize(q.re_trace_with(sigma.matrix()));
    let sol = lb.solve()?;
    sol.require_optimal("beta SDP")?;
    Ok((sol.value.max(0.0), sol.eval(&q)))
}

/// `D_h^ε(ρ‖σ) = −log β^ε + log(1−ε)`, `+∞` when `β^ε` is zero.
pub fn d_h(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<f64> {
    let (beta, _) = beta_eps(rho, sigma, eps)?;
    Ok(d_h_from_beta(beta, eps))
}

/// `D_h` from a given `β` value.
pub fn d_h_from_beta(beta: f64, eps: f64) -> f64 {
    if beta < BETA_FLOOR {
        f64::INFINITY
    } else {
        -beta.log2() + (1.0 - eps).log2()
    }
}

/// Additive correction `log(ε(1−ε+δ)/δ³) + 3 log 3`.
pub fn bridge_correction(eps: f64, delta: f64) -> f64 {
    (eps * (1.0 - eps + delta) / delta.powi(3)).log2() + 3.0 * 3f64.log2()
}

/// Interval `(D_h^{ε−δ} − log(ε(1−ε+δ)/δ³) − 3 log 3, D_h^ε)`.
///
/// The smooth max-relative entropy at radius `√(1−ε)` is at least `lower`,
/// and at radius `√(2(1−ε))` is at most `upper`.
pub fn dmax_dh_bridge(rho: &DensityOperator, sigma: &DensityOperator, eps: f64, delta: f64) -> Result<BridgeInterval> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    if !(delta > 0.0 && delta < eps) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, eps), got {delta}"
        )));
    }
    let upper = d_h(rho, sigma, eps)?;
    let lower = d_h(rho, sigma, eps - delta)? - bridge_correction(eps, delta);
    Ok(BridgeInterval { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DensityOperator {
        DensityOperator::from_diagonal(v).unwrap()
    }

    #[test]
    fn beta_examples() {
        let rho = diag(&[0.3, 0.7]);
        for eps in [0.0, 0.2, 0.6] {
            let (b, q) = beta_eps(&rho, &rho, eps).unwrap();
            assert!((b - (1.0 - eps)).abs() < 1e-9);
            assert!((q.alpha - (1.0 - eps)).abs() < 1e-9);
        }
        let zero = DensityOperator::basis(2, 0);
        let (b, _) = beta_eps(&zero, &DensityOperator::maximally_mixed(2), 0.0).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
        let (b, q) = beta_eps(&diag(&[0.5, 0.5]), &diag(&[0.9, 0.1]), 0.5).unwrap();
        assert!((b - 0.1).abs() < 1e-9);
        assert!((q.matrix[(1, 1)].re - 1.0).abs() < 1e-9 && q.matrix[(0, 0)].re.abs() < 1e-9);
    }

    #[test]
    fn d_h_examples() {
        let rho = diag(&[0.3, 0.7]);
        assert!(d_h(&rho, &rho, 0.4).unwrap().abs() < 1e-9);
        let v = d_h(&diag(&[0.5, 0.5]), &diag(&[0.9, 0.1]), 0.5).unwrap();
        assert!((v - 5f64.log2()).abs() < 1e-8);
        let inf = d_h(&DensityOperator::basis(2, 0), &DensityOperator::basis(2, 1), 0.0).unwrap();
        assert!(inf.is_infinite());
    }

    #[test]
    fn bridge_identity_example() {
        let rho = diag(&[0.4, 0.6]);
        let b = dmax_dh_bridge(&rho, &rho, 0.5, 0.25).unwrap();
        assert!(b.upper.abs() < 1e-9);
        let expected = -(0.5f64 * 0.75 / 0.25f64.powi(3)).log2() - 3.0 * 3f64.log2();
        assert!((b.lower - expected).abs() < 1e-9);
        assert!((b.lower + 9.34).abs() < 0.01);
    }

    #[test]
    fn sdp_agrees_on_diagonal_case() {
        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[0.9, 0.1]);
        for eps in [0.0, 0.25, 0.5] {
            let a = beta_eps(&rho, &sigma, eps).unwrap().0;
            let b = beta_eps_sdp(&rho, &sigma, eps).unwrap();
            assert!((a - b).abs() < 1e-7, "{eps}: {a} vs {b}");
        }
    }
}
