//! Non-smooth entropic quantities: von Neumann entropy, relative entropy,
//! mutual and Holevo information, the observational divergence, max-relative
//! entropy, max-information, the maximum information `T(Q)` of an ensemble
//! and the substate-theorem bound.
//!
//! The module also defines [`Ensemble`] and [`CqState`], the carriers for
//! finite state families and the classical-quantum states built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis;
use crate::linalg::{self, CMat};
use crate::operators::{partial_trace, BipartiteShape, DensityOperator, Side};
use crate::smoothing;

/// Eigenvalues at or below this are treated as zero in support tests.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

/// Weights at or below this are ignored when a symbol's block is needed.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Default grid size for [`d_obs`].
pub const D_OBS_GRID: usize = 512;

/// A finite family of states `Q: S → D(H)` with an optional distribution on `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    labels: Vec<String>,
    states: Vec<DensityOperator>,
    weights: Option<Vec<f64>>,
}

impl Ensemble {
    pub fn new(labels: Vec<String>, states: Vec<DensityOperator>, weights: Option<Vec<f64>>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidParameter("states: expected ≥ 1".into()));
        }
        if labels.len() != states.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} states",
                labels.len(),
                states.len()
            )));
        }
        let dim = states[0].dim();
        for s in &states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            if !s.is_normalized() {
                return Err(Error::InvalidState("ensemble members must be normalized".into()));
            }
        }
        if let Some(w) = &weights {
            check_probability(w, states.len())?;
        }
        Ok(Self {
            labels,
            states,
            weights,
        })
    }

    /// Ensemble labelled `0, 1, …` without weights.
    pub fn from_states(states: Vec<DensityOperator>) -> Result<Self> {
        let labels = (0..states.len()).map(|i| i.to_string()).collect();
        Self::new(labels, states, None)
    }

    /// Ensemble labelled `0, 1, …` with weights.
    pub fn weighted(states: Vec<DensityOperator>, weights: Vec<f64>) -> Result<Self> {
        let labels = (0..states.len()).map(|i| i.to_string()).collect();
        Self::new(labels, states, Some(weights))
    }

    /// Ensemble labelled `0, 1, …` with the uniform distribution.
    pub fn uniform(states: Vec<DensityOperator>) -> Result<Self> {
        let n = states.len();
        Self::weighted(states, vec![1.0 / n.max(1) as f64; n])
    }

    /// The same states with a new distribution.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.labels.clone(), self.states.clone(), Some(weights))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// The weights, or an error naming the operation that needs them.
    pub fn require_weights(&self) -> Result<&[f64]> {
        self.weights
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("ensemble has no weights".into()))
    }

    /// `ρ_AB(p) = Σ_x p_x |x⟩⟨x| ⊗ Q(x)`.
    pub fn cq_state(&self) -> Result<CqState> {
        let w = self.require_weights()?;
        CqState::new(w.iter().copied().zip(self.states.iter().cloned()).collect())
    }

    /// Average state `Σ_x p_x Q(x)`.
    pub fn average(&self) -> Result<DensityOperator> {
        let w = self.require_weights()?;
        let d = self.dim();
        let mut m = CMat::zeros(d, d);
        for (p, s) in w.iter().zip(&self.states) {
            m += s.matrix() * linalg::c(*p);
        }
        DensityOperator::from_numerical(&m, crate::StateKind::Normalized)
    }

    /// Sub-ensemble on the given indices; weights are renormalized.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let states = idx.iter().map(|&i| self.states[i].clone()).collect();
        let weights = match &self.weights {
            Some(w) => {
                let total: f64 = idx.iter().map(|&i| w[i]).sum();
                if total <= 0.0 {
                    return Err(Error::InvalidParameter("restriction has zero weight".into()));
                }
                Some(idx.iter().map(|&i| w[i] / total).collect())
            }
            None => None,
        };
        Self::new(labels, states, weights)
    }

    /// Product ensemble on `S × S'` with product states and weights.
    pub fn tensor(&self, other: &Ensemble) -> Result<Self> {
        let mut labels = Vec::new();
        let mut states = Vec::new();
        let mut weights = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            for (j, t) in other.states.iter().enumerate() {
                labels.push(format!("{},{}", self.labels[i], other.labels[j]));
                states.push(s.tensor(t));
                if let (Some(w), Some(v)) = (&self.weights, &other.weights) {
                    weights.push(w[i] * v[j]);
                }
            }
        }
        let weights = (self.weights.is_some() && other.weights.is_some()).then_some(weights);
        Self::new(labels, states, weights)
    }
}

pub(crate) fn check_probability(w: &[f64], len: usize) -> Result<()> {
    if w.len() != len {
        return Err(Error::InvalidParameter(format!("{} weights for {len} states", w.len())));
    }
    if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter("weights must be nonnegative".into()));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// A classical-quantum operator `Σ_x q_x |x⟩⟨x| ⊗ ρ_x` with normalized conditionals.
#[derive(Debug, Clone, PartialEq)]
pub struct CqState {
    blocks: Vec<(f64, DensityOperator)>,
}

impl CqState {
    pub fn new(blocks: Vec<(f64, DensityOperator)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter("blocks: expected ≥ 1".into()));
        }
        let d = blocks[0].1.dim();
        let mut total = 0.0;
        for (q, s) in &blocks {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.dim(),
                });
            }
            if !(*q >= 0.0) {
                return Err(Error::InvalidParameter("block weights must be nonnegative".into()));
            }
            total += q;
        }
        if total > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter(format!("block weights sum to {total} > 1")));
        }
        Ok(Self { blocks })
    }

    pub fn shape(&self) -> BipartiteShape {
        BipartiteShape::new(self.blocks.len(), self.blocks[0].1.dim())
    }

    pub fn blocks(&self) -> &[(f64, DensityOperator)] {
        &self.blocks
    }

    pub fn weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.0).collect()
    }

    /// `ρ_A = diag(q)`.
    pub fn marginal_a(&self) -> Result<DensityOperator> {
        DensityOperator::from_diagonal(&self.weights())
    }

    /// `ρ_B = Σ_x q_x ρ_x`.
    pub fn marginal_b(&self) -> Result<DensityOperator> {
        let d = self.shape().dim_b;
        let mut m = CMat::zeros(d, d);
        for (q, s) in &self.blocks {
            m += s.matrix() * linalg::c(*q);
        }
        if (self.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-9 {
            DensityOperator::new(m)
        } else {
            DensityOperator::subnormalized(m)
        }
    }

    /// The block-diagonal operator on `A ⊗ B`.
    pub fn to_density(&self) -> Result<DensityOperator> {
        let sh = self.shape();
        let d = sh.dim_b;
        let mut m = CMat::zeros(sh.dim(), sh.dim());
        for (x, (q, s)) in self.blocks.iter().enumerate() {
            m.view_mut((x * d, x * d), (d, d))
                .copy_from(&(s.matrix() * linalg::c(*q)));
        }
        if (self.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-9 {
            DensityOperator::new(m)
        } else {
            DensityOperator::subnormalized(m)
        }
    }

    /// Read a CQ structure off an operator that is block diagonal on `A`.
    pub fn from_density(rho: &DensityOperator, shape: BipartiteShape) -> Result<Option<Self>> {
        shape.check(rho.dim())?;
        let (da, db) = (shape.dim_a, shape.dim_b);
        let m = rho.matrix();
        for x in 0..da {
            for y in 0..da {
                if x != y
                    && linalg::max_abs_diff(&m.view((x * db, y * db), (db, db)).into_owned(), &CMat::zeros(db, db))
                        > 1e-12
                {
                    return Ok(None);
                }
            }
        }
        let mut blocks = Vec::with_capacity(da);
        for x in 0..da {
            let b = m.view((x * db, x * db), (db, db)).into_owned();
            let q = linalg::re_trace(&b);
            let cond = if q > WEIGHT_FLOOR {
                DensityOperator::from_numerical(&b, crate::StateKind::Normalized)?
            } else {
                DensityOperator::maximally_mixed(db)
            };
            blocks.push((q.max(0.0), cond));
        }
        Ok(Some(Self::new(blocks)?))
    }

    /// Ensemble of the conditionals, weighted by the normalized block weights.
    pub fn ensemble(&self) -> Result<Ensemble> {
        let total: f64 = self.weights().iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidState("zero CQ operator".into()));
        }
        Ensemble::weighted(
            self.blocks.iter().map(|b| b.1.clone()).collect(),
            self.blocks.iter().map(|b| b.0 / total).collect(),
        )
    }
}

fn require_normalized(rho: &DensityOperator, what: &str) -> Result<()> {
    if rho.is_normalized() {
        Ok(())
    } else {
        Err(Error::InvalidState(format!("{what} expects a normalized state")))
    }
}

fn same_dim(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy `H(a) = −a log a − (1−a) log(1−a)`.
pub fn binary_entropy(a: f64) -> f64 {
    -xlog2x(a) - xlog2x(1.0 - a)
}

/// Von Neumann entropy `S(ρ) = −Tr ρ log ρ`.
pub fn von_neumann(rho: &DensityOperator) -> Result<f64> {
    require_normalized(rho, "von_neumann")?;
    Ok(rho.eigenvalues().into_iter().map(|l| -xlog2x(l)).sum::<f64>().max(0.0))
}

/// Whether `supp ρ ⊆ supp σ`, decided with [`SUPPORT_THRESHOLD`].
pub fn support_included(rho: &DensityOperator, sigma: &DensityOperator) -> Result<bool> {
    same_dim(rho, sigma)?;
    let eig = sigma.eigen();
    for (i, &v) in eig.values.iter().enumerate() {
        if v <= SUPPORT_THRESHOLD {
            let col = eig.vectors.column(i);
            let w = (col.adjoint() * rho.matrix() * col)[(0, 0)].re;
            if w > SUPPORT_THRESHOLD {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Relative entropy `S(ρ‖σ) = Tr ρ log ρ − Tr ρ log σ`, `+∞` without support inclusion.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    require_normalized(rho, "relative_entropy")?;
    require_normalized(sigma, "relative_entropy")?;
    if !support_included(rho, sigma)? {
        return Ok(f64::INFINITY);
    }
    let neg_s: f64 = rho.eigenvalues().into_iter().map(xlog2x).sum();
    let log_sigma = sigma
        .eigen()
        .map(|l| if l > SUPPORT_THRESHOLD { l.log2() } else { 0.0 });
    Ok((neg_s - linalg::re_trace_prod(rho.matrix(), &log_sigma)).max(0.0))
}

/// Mutual information `I(A:B) = S(A) + S(B) − S(AB)`, clamped at zero.
pub fn mutual_information(rho_ab: &DensityOperator, shape: BipartiteShape) -> Result<f64> {
    require_normalized(rho_ab, "mutual_information")?;
    let a = partial_trace(rho_ab, shape, Side::B)?;
    let b = partial_trace(rho_ab, shape, Side::A)?;
    Ok((von_neumann(&a)? + von_neumann(&b)? - von_neumann(rho_ab)?).max(0.0))
}

/// Holevo information `χ = Σ_j p_j S(ρ_j ‖ ρ̄)`.
pub fn holevo(ensemble: &Ensemble) -> Result<f64> {
    let w = ensemble.require_weights()?;
    let avg = ensemble.average()?;
    let mut chi = 0.0;
    for (p, s) in w.iter().zip(ensemble.states()) {
        if *p > 0.0 {
            chi += p * relative_entropy(s, &avg)?;
        }
    }
    Ok(chi.max(0.0))
}

/// Max-relative entropy `D_max(ρ‖σ) = log min{λ : ρ ⪯ 2^λ σ}`.
///
/// Computed on `supp σ`; `+∞` without support inclusion and `−∞` for `ρ = 0`.
pub fn d_max(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dim(rho, sigma)?;
    if !support_included(rho, sigma)? {
        return Ok(f64::INFINITY);
    }
    let eig = sigma.eigen();
    let (v, vals) = eig.support(SUPPORT_THRESHOLD);
    let inv_sqrt: Vec<f64> = vals.iter().map(|l| 1.0 / l.sqrt()).collect();
    let mut m = v.adjoint() * rho.matrix() * &v;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= linalg::c(inv_sqrt[i] * inv_sqrt[j]);
        }
    }
    let top = if m.nrows() == 0 { 0.0 } else { linalg::max_eig(&m) };
    if top <= 0.0 {
        Ok(f64::NEG_INFINITY)
    } else {
        Ok(top.log2())
    }
}

/// Max-information `I_max(A:B) = min_σ D_max(ρ_AB ‖ ρ_A ⊗ σ)`, solved as an SDP.
pub fn i_max(rho_ab: &DensityOperator, shape: BipartiteShape) -> Result<f64> {
    require_normalized(rho_ab, "i_max")?;
    if let Some(cq) = CqState::from_density(rho_ab, shape)? {
        return Ok(smoothing::i_max_cq_sdp(&cq.ensemble()?)?.value);
    }
    Ok(smoothing::i_max_sdp(rho_ab, shape)?.value)
}

/// Max-information of `ρ_AB(p)` for a weighted ensemble.
pub fn i_max_cq(ensemble: &Ensemble) -> Result<f64> {
    Ok(smoothing::i_max_cq_sdp(ensemble)?.value)
}

/// Observational divergence `sup_M Tr(Mρ) log(Tr Mρ / Tr Mσ)`.
///
/// For each `t = Tr Mρ` the best `M` is an optimal test, so the value is
/// `sup_t t log(t / β^{1−t}(ρ‖σ))`. The supremum is taken over a grid of
/// `grid_size` points followed by a golden-section refinement around the best
/// grid point; the result is a lower estimate of the true supremum.
pub fn d_obs(rho: &DensityOperator, sigma: &DensityOperator, grid_size: usize) -> Result<f64> {
    require_normalized(rho, "d_obs")?;
    require_normalized(sigma, "d_obs")?;
    if grid_size == 0 {
        return Err(Error::InvalidParameter("grid_size must be positive".into()));
    }
    if !support_included(rho, sigma)? {
        return Ok(f64::INFINITY);
    }
    let f = |t: f64| -> Result<f64> {
        let (beta, _) = hypothesis::beta_eps(rho, sigma, (1.0 - t).clamp(0.0, 1.0 - 1e-15))?;
        if beta <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(t * (t / beta).log2())
    };
    let n = grid_size;
    let mut best = (0.0, 1usize);
    for k in 1..=n {
        let v = f(k as f64 / n as f64)?;
        if v > best.0 || k == 1 {
            best = (v.max(best.0), k);
        }
        if v.is_infinite() {
            return Ok(v);
        }
    }
    let (mut lo, mut hi) = (
        (best.1 as f64 - 1.0).max(1e-9) / n as f64,
        ((best.1 + 1).min(n) as f64) / n as f64,
    );
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    let mut value = best.0.max(f1).max(f2);
    for _ in 0..60 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
            value = value.max(f2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
            value = value.max(f1);
        }
    }
    Ok(value.max(0.0))
}

/// Result of [`t_of_q`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxInformation {
    /// `I(A:B)` at the returned distribution.
    pub value: f64,
    /// Maximizing distribution.
    pub p: Vec<f64>,
    pub iterations: usize,
    /// Upper bound on the distance to the optimum: `max_x S(Q_x‖ρ̄) − I`.
    pub certificate: f64,
}

/// `I` at `p` together with the divergences `S(Q_x‖ρ̄_p)`.
fn information_at(ensemble: &Ensemble, p: &[f64]) -> Result<(f64, Vec<f64>)> {
    let avg = ensemble.with_weights(p.to_vec())?.average()?;
    let div = ensemble
        .states()
        .iter()
        .map(|s| relative_entropy(s, &avg))
        .collect::<Result<Vec<f64>>>()?;
    let info = p.iter().zip(&div).filter(|(q, _)| **q > 0.0).map(|(q, d)| q * d).sum();
    Ok((info, div))
}

/// Components below this weight are treated as inactive by the Newton step.
const ACTIVE_WEIGHT: f64 = 1e-10;
/// Weight given to components the Newton step drives to the boundary.
const FLOOR_WEIGHT: f64 = 1e-15;

/// Hessian of `I(p)` in bits over the `active` components:
/// `−(1/ln 2) Σ_ij (Q_x)_ij (Q_y)_ji L_ij` in the eigenbasis of `ρ̄`, where
/// `L_ij` is the divided difference of `ln` at the eigenvalues.
fn information_hessian(ensemble: &Ensemble, p: &[f64], active: &[usize]) -> Result<nalgebra::DMatrix<f64>> {
    let avg = ensemble.with_weights(p.to_vec())?.average()?;
    let eig = avg.eigen();
    let support: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > 1e-14).collect();
    let lam = &eig.values;
    let l = |i: usize, j: usize| {
        let (a, b) = (lam[i], lam[j]);
        if (a - b).abs() > 1e-12 * a.max(b) {
            (a.ln() - b.ln()) / (a - b)
        } else {
            2.0 / (a + b)
        }
    };
    let rotated: Vec<CMat> = active
        .iter()
        .map(|&x| eig.vectors.adjoint() * ensemble.states()[x].matrix() * &eig.vectors)
        .collect();
    let m = active.len();
    let mut h = nalgebra::DMatrix::<f64>::zeros(m, m);
    for u in 0..m {
        for v in u..m {
            let mut acc = 0.0;
            for &i in &support {
                for &j in &support {
                    acc += (rotated[u][(i, j)] * rotated[v][(j, i)]).re * l(i, j);
                }
            }
            let val = -acc / std::f64::consts::LN_2;
            h[(u, v)] = val;
            h[(v, u)] = val;
        }
    }
    Ok(h)
}

/// One Newton step for `max I(p)` on the active face of the simplex, with
/// backtracking; returns the new point when it increases `I`.
fn newton_step(ensemble: &Ensemble, p: &[f64], info: f64, div: &[f64]) -> Result<Option<(Vec<f64>, f64, Vec<f64>)>> {
    let active: Vec<usize> = (0..p.len()).filter(|&x| p[x] > ACTIVE_WEIGHT).collect();
    let m = active.len();
    if m < 2 {
        return Ok(None);
    }
    let h = information_hessian(ensemble, p, &active)?;
    // KKT system of max gᵀΔ + ½ΔᵀHΔ subject to Σ Δ = 0.
    let mut kkt = nalgebra::DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut rhs = nalgebra::DVector::<f64>::zeros(m + 1);
    let scale = h.amax().max(1.0);
    for u in 0..m {
        for v in 0..m {
            kkt[(u, v)] = h[(u, v)];
        }
        kkt[(u, u)] -= 1e-12 * scale;
        kkt[(u, m)] = 1.0;
        kkt[(m, u)] = 1.0;
        rhs[u] = -div[active[u]];
    }
    let Some(sol) = kkt.svd(true, true).solve(&rhs, 1e-14 * scale).ok() else {
        return Ok(None);
    };
    let delta: Vec<f64> = (0..m).map(|u| sol[u]).collect();
    let mut t_max: f64 = 1.0;
    for u in 0..m {
        if delta[u] < 0.0 {
            t_max = t_max.min(p[active[u]] / -delta[u]);
        }
    }
    let mut t = t_max;
    for _ in 0..40 {
        let mut next = p.to_vec();
        for u in 0..m {
            next[active[u]] = (p[active[u]] + t * delta[u]).max(FLOOR_WEIGHT);
        }
        let z: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= z);
        let (ni, nd) = information_at(ensemble, &next)?;
        if ni > info {
            return Ok(Some((next, ni, nd)));
        }
        t /= 2.0;
    }
    Ok(None)
}

/// `T(Q) = max_p I(A:B)_{ρ(p)}`.
///
/// Every iteration tries a Newton step on the components with non-negligible
/// weight, then takes a Blahut–Arimoto step `p_x ∝ p_x 2^{S(Q_x‖ρ̄) − max}`,
/// which never decreases `I` and lets every component regain weight.
/// Iterates until `max_x S(Q_x‖ρ̄_p) − I_p ≤ tol`, which bounds the distance
/// to the optimum.
pub fn t_of_q(ensemble: &Ensemble, tol: f64, max_iter: usize) -> Result<MaxInformation> {
    let n = ensemble.len();
    let mut p = vec![1.0 / n as f64; n];
    let (mut info, mut div) = information_at(ensemble, &p)?;
    for it in 0..=max_iter {
        let top = div.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gap = top - info;
        if gap <= tol {
            return Ok(MaxInformation {
                value: info.max(0.0),
                p,
                iterations: it,
                certificate: gap.max(0.0),
            });
        }
        if it == max_iter {
            return Err(Error::NonConvergence {
                what: "t_of_q".into(),
                iterations: it,
                residual: gap,
            });
        }
        if let Some((np, _, nd)) = newton_step(ensemble, &p, info, &div)? {
            p = np;
            div = nd;
        }
        let top = div.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut next: Vec<f64> = p.iter().zip(&div).map(|(q, d)| q * (d - top).exp2()).collect();
        let z: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= z);
        p = next;
        (info, div) = information_at(ensemble, &p)?;
    }
    unreachable!("loop returns at max_iter")
}

/// Substate-theorem bound `D_obs(ρ‖σ)/ε² + log 1/(1−ε²)` on `D_max^ε(ρ‖σ)`.
pub fn substate_bound(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    if eps > 1.0 - 1e-9 {
        return Ok(f64::INFINITY);
    }
    let obs = d_obs(rho, sigma, D_OBS_GRID)?;
    Ok(obs / (eps * eps) - (1.0 - eps * eps).log2())
}
