//! Dense primal–dual interior-point solver for complex Hermitian SDPs.
//!
//! The standard-form pair is
//!
//! ```text
//! (P)  minimize  Σ_b ⟨C_b, X_b⟩   s.t.  Σ_b ⟨A_ib, X_b⟩ = b_i,  X_b ⪰ 0
//! (D)  maximize  b·y               s.t.  Z_b = C_b − Σ_i y_i A_ib ⪰ 0
//! ```
//!
//! with `⟨A, X⟩ = Re Tr(A X)`. Search directions are HKM with a Mehrotra
//! predictor–corrector step; the start point is infeasible.
//!
//! [`LmiBuilder`] writes problems in the (D) form: real decision variables,
//! affine Hermitian matrix expressions constrained to be PSD, and a linear
//! objective to minimize.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};

/// Sparse Hermitian coefficient of one constraint on one block.
#[derive(Debug, Clone)]
pub struct BlockTerm {
    pub block: usize,
    /// `(row, col, value)` triples; the represented matrix must be Hermitian.
    pub entries: Vec<(usize, usize, C64)>,
}

/// Solver tolerances and limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpSettings {
    /// Relative duality-gap target.
    pub gap_tol: f64,
    /// Relative primal and dual residual target.
    pub feas_tol: f64,
    /// Residual level below which a stalled or exhausted solve is accepted
    /// as [`SdpStatus::NearOptimal`].
    pub near_tol: f64,
    pub max_iter: usize,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            feas_tol: 1e-9,
            near_tol: 1e-6,
            max_iter: 200,
        }
    }
}

/// Block-structured SDP in standard form.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub c: Vec<CMat>,
    pub constraints: Vec<Vec<BlockTerm>>,
    pub b: Vec<f64>,
    pub settings: SdpSettings,
}

/// Termination status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    /// Stopped early with gap and residuals below `near_tol`.
    NearOptimal,
    Infeasible,
    MaxIter,
}

/// Per-solve diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpDiagnostics {
    pub iterations: usize,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

/// Primal and dual solution with status.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    pub x: Vec<CMat>,
    pub y: Vec<f64>,
    pub z: Vec<CMat>,
    pub diagnostics: SdpDiagnostics,
}

impl SdpProblem {
    fn validate(&self) -> Result<()> {
        if self.c.len() != self.block_dims.len() {
            return Err(Error::InvalidParameter("one objective block per block dim".into()));
        }
        for (cb, &n) in self.c.iter().zip(&self.block_dims) {
            if cb.shape() != (n, n) || linalg::hermitian_defect(cb) > 1e-9 {
                return Err(Error::InvalidParameter("objective blocks must be Hermitian".into()));
            }
        }
        if self.b.len() != self.constraints.len() {
            return Err(Error::InvalidParameter("one right-hand side per constraint".into()));
        }
        for terms in &self.constraints {
            for t in terms {
                let n = *self.block_dims.get(t.block).ok_or_else(|| {
                    Error::InvalidParameter(format!("constraint refers to missing block {}", t.block))
                })?;
                if t.entries.iter().any(|&(r, cc, _)| r >= n || cc >= n) {
                    return Err(Error::InvalidParameter("constraint entry out of range".into()));
                }
            }
        }
        Ok(())
    }
}

fn inner(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| linalg::re_trace_prod(x, y)).sum()
}

fn fro(a: &[CMat]) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

/// `⟨A, X⟩` for a sparse Hermitian coefficient.
fn sparse_dot(entries: &[(usize, usize, C64)], x: &CMat) -> f64 {
    entries.iter().map(|&(r, cc, a)| (a * x[(cc, r)]).re).sum()
}

/// Largest step `α ≤ cap` with `x + α dx ⪰ 0`, given `x ≻ 0`.
fn max_step(x: &[CMat], dx: &[CMat]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xb, dxb) in x.iter().zip(dx) {
        let n = xb.nrows();
        if n == 0 {
            continue;
        }
        let lmin = match Cholesky::new(xb.clone()) {
            Some(ch) => {
                let l = ch.l();
                let t = l.solve_lower_triangular(dxb).unwrap_or_else(|| dxb.clone());
                let s = l.solve_lower_triangular(&t.adjoint()).unwrap_or_else(|| t.adjoint());
                linalg::min_eig(&linalg::hermitize(&s.adjoint()))
            }
            None => -f64::INFINITY,
        };
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    alpha
}

fn herm_inverse(m: &CMat) -> Option<CMat> {
    let ch = Cholesky::new(m.clone())?;
    Some(linalg::hermitize(&ch.inverse()))
}

struct Prepared<'a> {
    p: &'a SdpProblem,
    /// For each block, the constraint indices touching it with their entries.
    by_block: Vec<Vec<(usize, usize)>>,
    total_dim: f64,
}

impl<'a> Prepared<'a> {
    fn new(p: &'a SdpProblem) -> Self {
        let mut by_block = vec![Vec::new(); p.block_dims.len()];
        for (i, terms) in p.constraints.iter().enumerate() {
            for (k, t) in terms.iter().enumerate() {
                by_block[t.block].push((i, k));
            }
        }
        let total_dim = p.block_dims.iter().sum::<usize>() as f64;
        Self { p, by_block, total_dim }
    }

    fn a_op(&self, x: &[CMat]) -> Vec<f64> {
        self.p
            .constraints
            .iter()
            .map(|terms| terms.iter().map(|t| sparse_dot(&t.entries, &x[t.block])).sum())
            .collect()
    }

    fn a_adj(&self, y: &[f64]) -> Vec<CMat> {
        let mut out: Vec<CMat> = self.p.block_dims.iter().map(|&n| CMat::zeros(n, n)).collect();
        for (terms, &yi) in self.p.constraints.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for t in terms {
                let ob = &mut out[t.block];
                for &(r, cc, a) in &t.entries {
                    ob[(r, cc)] += a * c(yi);
                }
            }
        }
        out
    }

    fn schur(&self, x: &[CMat], zinv: &[CMat]) -> DMatrix<f64> {
        let m = self.p.b.len();
        let mut s = DMatrix::<f64>::zeros(m, m);
        for (j, terms) in self.p.constraints.iter().enumerate() {
            for t in terms {
                let b = t.block;
                let n = self.p.block_dims[b];
                let xb = &x[b];
                // columns of X·A_j that can be nonzero
                let mut xa = CMat::zeros(n, n);
                let mut cols: Vec<usize> = Vec::new();
                for &(r, cc, a) in &t.entries {
                    for p in 0..n {
                        xa[(p, cc)] += xb[(p, r)] * a;
                    }
                    if !cols.contains(&cc) {
                        cols.push(cc);
                    }
                }
                let zb = &zinv[b];
                let mut g = CMat::zeros(n, n);
                for &cc in &cols {
                    for p in 0..n {
                        let v = xa[(p, cc)];
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for q in 0..n {
                            g[(p, q)] += v * zb[(cc, q)];
                        }
                    }
                }
                for &(i, k) in &self.by_block[b] {
                    let ent = &self.p.constraints[i][k].entries;
                    s[(i, j)] += sparse_dot(ent, &g);
                }
            }
        }
        (&s + s.transpose()) * 0.5
    }
}

fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(ch.solve(rhs));
    }
    let scale = (0..m.nrows()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    for k in [1e-14, 1e-12, 1e-10] {
        let mut r = m.clone();
        for i in 0..m.nrows() {
            r[(i, i)] += k * scale;
        }
        if let Some(ch) = Cholesky::new(r) {
            return Some(ch.solve(rhs));
        }
    }
    m.clone().lu().solve(rhs)
}

/// Solve the standard-form pair `(P)`/`(D)`.
pub fn solve_sdp(problem: &SdpProblem) -> Result<SdpSolution> {
    problem.validate()?;
    let prep = Prepared::new(problem);
    let set = problem.settings;
    let m = problem.b.len();
    let nb = problem.block_dims.len();

    let norm_b = problem.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_c = fro(&problem.c);

    let mut x = Vec::with_capacity(nb);
    let mut z = Vec::with_capacity(nb);
    for (bi, &n) in problem.block_dims.iter().enumerate() {
        let sn = (n as f64).sqrt();
        let mut xi = 10f64.max(sn);
        let mut eta = 10f64.max(sn).max(problem.c[bi].norm());
        for (i, terms) in problem.constraints.iter().enumerate() {
            for t in terms.iter().filter(|t| t.block == bi) {
                let an = t.entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt();
                xi = xi.max(n as f64 * (1.0 + problem.b[i].abs()) / (1.0 + an));
                eta = eta.max(an);
            }
        }
        eta = (1.0 + eta) / sn.max(1.0);
        x.push(linalg::eye(n) * c(xi));
        z.push(linalg::eye(n) * c(eta.max(1.0)));
    }
    let mut y = vec![0.0; m];

    let mut diag = SdpDiagnostics {
        iterations: 0,
        relative_gap: f64::INFINITY,
        primal_infeasibility: f64::INFINITY,
        dual_infeasibility: f64::INFINITY,
    };
    let mut status = SdpStatus::MaxIter;
    let mut stall = 0;
    // Best iterate by max(gap, residuals); late iterations can lose accuracy.
    let mut best: Option<(f64, Vec<CMat>, Vec<f64>, Vec<CMat>, SdpDiagnostics)> = None;
    let mut since_best = 0;

    for it in 0..=set.max_iter {
        let ax = prep.a_op(&x);
        let rp: Vec<f64> = problem.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = prep.a_adj(&y);
        let rd: Vec<CMat> = (0..nb).map(|k| &problem.c[k] - &aty[k] - &z[k]).collect();
        let pobj = inner(&problem.c, &x);
        let dobj: f64 = problem.b.iter().zip(&y).map(|(b, v)| b * v).sum();
        let xz = inner(&x, &z);
        let mu = xz / prep.total_dim;
        let denom = 1.0 + pobj.abs() + dobj.abs();
        diag = SdpDiagnostics {
            iterations: it,
            relative_gap: ((pobj - dobj).abs().max(xz.abs())) / denom,
            primal_infeasibility: rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_b),
            dual_infeasibility: fro(&rd) / (1.0 + norm_c),
        };
        if !(pobj.is_finite() && dobj.is_finite()) {
            return Err(Error::SolverFailure("interior-point iterates diverged".into()));
        }
        if diag.relative_gap <= set.gap_tol
            && diag.primal_infeasibility <= set.feas_tol
            && diag.dual_infeasibility <= set.feas_tol
        {
            status = SdpStatus::Optimal;
            break;
        }
        let merit = diag
            .relative_gap
            .max(diag.primal_infeasibility)
            .max(diag.dual_infeasibility);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, x.clone(), y.clone(), z.clone(), diag));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= 20 {
                break;
            }
        }
        let xnorm = fro(&x);
        let ynorm = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if xnorm > 1e12 || ynorm > 1e12 {
            status = SdpStatus::Infeasible;
            break;
        }
        if it == set.max_iter || stall >= 8 {
            break;
        }

        let zinv: Vec<CMat> = match z.iter().map(herm_inverse).collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => break,
        };
        let schur = prep.schur(&x, &zinv);

        let direction = |sigma_mu: f64, corr: Option<&Vec<CMat>>| -> Option<(Vec<CMat>, Vec<f64>, Vec<CMat>)> {
            // R = σμ Z⁻¹ − X − X Rd Z⁻¹ − K
            let r: Vec<CMat> = (0..nb)
                .map(|k| {
                    let mut r = &zinv[k] * c(sigma_mu) - &x[k] - &x[k] * &rd[k] * &zinv[k];
                    if let Some(kk) = corr {
                        r -= &kk[k];
                    }
                    r
                })
                .collect();
            let ar = prep.a_op(&r);
            let rhs = DVector::from_iterator(m, rp.iter().zip(&ar).map(|(a, b)| a - b));
            let dy = solve_spd(&schur, &rhs)?;
            let dyv: Vec<f64> = dy.iter().copied().collect();
            let atdy = prep.a_adj(&dyv);
            let dz: Vec<CMat> = (0..nb).map(|k| &rd[k] - &atdy[k]).collect();
            let dx: Vec<CMat> = (0..nb)
                .map(|k| {
                    let mut t = &zinv[k] * c(sigma_mu) - &x[k] - &x[k] * &dz[k] * &zinv[k];
                    if let Some(kk) = corr {
                        t -= &kk[k];
                    }
                    linalg::hermitize(&t)
                })
                .collect();
            Some((dx, dyv, dz))
        };

        let Some((dxa, _dya, dza)) = direction(0.0, None) else {
            break;
        };
        let ap = max_step(&x, &dxa).min(1.0);
        let ad = max_step(&z, &dza).min(1.0);
        let xa: Vec<CMat> = (0..nb).map(|k| &x[k] + &dxa[k] * c(ap)).collect();
        let za: Vec<CMat> = (0..nb).map(|k| &z[k] + &dza[k] * c(ad)).collect();
        let mu_aff = inner(&xa, &za) / prep.total_dim;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };
        let kcorr: Vec<CMat> = (0..nb).map(|k| &dxa[k] * &dza[k] * &zinv[k]).collect();
        let Some((dx, dy, dz)) = direction(sigma * mu, Some(&kcorr)) else {
            break;
        };
        let gamma = 0.9 + 0.09 * (1.0 - sigma).clamp(0.0, 1.0);
        let ap = (gamma * max_step(&x, &dx)).min(1.0);
        let ad = (gamma * max_step(&z, &dz)).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stall += 1;
        } else {
            stall = 0;
        }
        for k in 0..nb {
            x[k] += &dx[k] * c(ap);
            x[k] = linalg::hermitize(&x[k]);
            z[k] += &dz[k] * c(ad);
            z[k] = linalg::hermitize(&z[k]);
        }
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += ad * d;
        }
    }

    if status == SdpStatus::MaxIter {
        if let Some((_, bx, by, bz, bd)) = best {
            if bd.relative_gap.max(bd.primal_infeasibility).max(bd.dual_infeasibility)
                < diag
                    .relative_gap
                    .max(diag.primal_infeasibility)
                    .max(diag.dual_infeasibility)
            {
                x = bx;
                y = by;
                z = bz;
                diag = SdpDiagnostics {
                    iterations: diag.iterations,
                    ..bd
                };
            }
        }
    }
    if status == SdpStatus::MaxIter
        && diag.relative_gap <= set.near_tol
        && diag.primal_infeasibility <= set.near_tol
        && diag.dual_infeasibility <= set.near_tol
    {
        status = SdpStatus::NearOptimal;
    }
    let primal_value = inner(&problem.c, &x);
    let dual_value: f64 = problem.b.iter().zip(&y).map(|(b, v)| b * v).sum();
    Ok(SdpSolution {
        status,
        primal_value,
        dual_value,
        x,
        y,
        z,
        diagnostics: diag,
    })
}

/// Real affine function of the decision variables.
#[derive(Debug, Clone, Default)]
pub struct Affine {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl Affine {
    pub fn constant(v: f64) -> Self {
        Self {
            constant: v,
            terms: Vec::new(),
        }
    }

    pub fn var(k: usize) -> Self {
        Self {
            constant: 0.0,
            terms: vec![(k, 1.0)],
        }
    }

    pub fn add(&self, o: &Affine) -> Affine {
        let mut t = self.terms.clone();
        t.extend_from_slice(&o.terms);
        Affine {
            constant: self.constant + o.constant,
            terms: t,
        }
    }

    pub fn scale(&self, s: f64) -> Affine {
        Affine {
            constant: self.constant * s,
            terms: self.terms.iter().map(|&(k, v)| (k, v * s)).collect(),
        }
    }

    pub fn sub(&self, o: &Affine) -> Affine {
        self.add(&o.scale(-1.0))
    }

    pub fn plus(&self, v: f64) -> Affine {
        Affine {
            constant: self.constant + v,
            terms: self.terms.clone(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(k, v)| v * y[k]).sum::<f64>()
    }

    pub fn as_matrix(&self) -> MatExpr {
        MatExpr {
            rows: 1,
            cols: 1,
            constant: CMat::from_element(1, 1, c(self.constant)),
            terms: self.terms.iter().map(|&(k, v)| (k, 0, 0, c(v))).collect(),
        }
    }
}

/// Affine matrix-valued expression `constant + Σ y_k F_k` with sparse `F_k`.
#[derive(Debug, Clone)]
pub struct MatExpr {
    pub rows: usize,
    pub cols: usize,
    pub constant: CMat,
    /// `(variable, row, col, coefficient)`.
    pub terms: Vec<(usize, usize, usize, C64)>,
}

impl MatExpr {
    pub fn constant(m: CMat) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            constant: m,
            terms: Vec::new(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::constant(CMat::zeros(rows, cols))
    }

    pub fn add(&self, o: &MatExpr) -> MatExpr {
        assert_eq!(
            (self.rows, self.cols),
            (o.rows, o.cols),
            "shape mismatch in MatExpr::add"
        );
        let mut t = self.terms.clone();
        t.extend_from_slice(&o.terms);
        MatExpr {
            rows: self.rows,
            cols: self.cols,
            constant: &self.constant + &o.constant,
            terms: t,
        }
    }

    pub fn scale(&self, s: f64) -> MatExpr {
        MatExpr {
            rows: self.rows,
            cols: self.cols,
            constant: &self.constant * c(s),
            terms: self.terms.iter().map(|&(k, r, cc, v)| (k, r, cc, v * s)).collect(),
        }
    }

    pub fn sub(&self, o: &MatExpr) -> MatExpr {
        self.add(&o.scale(-1.0))
    }

    pub fn adjoint(&self) -> MatExpr {
        MatExpr {
            rows: self.cols,
            cols: self.rows,
            constant: self.constant.adjoint(),
            terms: self.terms.iter().map(|&(k, r, cc, v)| (k, cc, r, v.conj())).collect(),
        }
    }

    /// `k · self` for a dense matrix `k`.
    pub fn left_mul(&self, k: &CMat) -> MatExpr {
        assert_eq!(k.ncols(), self.rows);
        let mut terms = Vec::new();
        for &(v, r, cc, a) in &self.terms {
            for i in 0..k.nrows() {
                let w = k[(i, r)] * a;
                if w != C64::new(0.0, 0.0) {
                    terms.push((v, i, cc, w));
                }
            }
        }
        MatExpr {
            rows: k.nrows(),
            cols: self.cols,
            constant: k * &self.constant,
            terms,
        }
    }

    /// `self · k` for a dense matrix `k`.
    pub fn right_mul(&self, k: &CMat) -> MatExpr {
        self.adjoint().left_mul(&k.adjoint()).adjoint()
    }

    /// `a ⊗ self`.
    pub fn kron_left(&self, a: &CMat) -> MatExpr {
        let (ar, ac) = a.shape();
        let mut terms = Vec::new();
        for &(v, r, cc, w) in &self.terms {
            for i in 0..ar {
                for j in 0..ac {
                    let z = a[(i, j)] * w;
                    if z != C64::new(0.0, 0.0) {
                        terms.push((v, i * self.rows + r, j * self.cols + cc, z));
                    }
                }
            }
        }
        MatExpr {
            rows: ar * self.rows,
            cols: ac * self.cols,
            constant: linalg::kron(a, &self.constant),
            terms,
        }
    }

    /// `Re Tr(self)`.
    pub fn re_trace(&self) -> Affine {
        Affine {
            constant: linalg::re_trace(&self.constant),
            terms: self
                .terms
                .iter()
                .filter(|t| t.1 == t.2)
                .map(|&(k, _, _, v)| (k, v.re))
                .collect(),
        }
    }

    /// `Re Tr(self · w)`.
    pub fn re_trace_with(&self, w: &CMat) -> Affine {
        Affine {
            constant: linalg::re_trace_prod(&self.constant, w),
            terms: self
                .terms
                .iter()
                .map(|&(k, r, cc, v)| (k, (v * w[(cc, r)]).re))
                .filter(|t| t.1 != 0.0)
                .collect(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> CMat {
        let mut m = self.constant.clone();
        for &(k, r, cc, v) in &self.terms {
            m[(r, cc)] += v * c(y[k]);
        }
        m
    }

    /// Assemble a block matrix; `None` entries are zero blocks.
    pub fn block(grid: &[Vec<Option<&MatExpr>>]) -> MatExpr {
        let nr = grid.len();
        let nc = grid[0].len();
        let mut heights = vec![0; nr];
        let mut widths = vec![0; nc];
        for (i, row) in grid.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if let Some(e) = e {
                    heights[i] = e.rows;
                    widths[j] = e.cols;
                }
            }
        }
        let rows: usize = heights.iter().sum();
        let cols: usize = widths.iter().sum();
        let mut constant = CMat::zeros(rows, cols);
        let mut terms = Vec::new();
        let mut r0 = 0;
        for (i, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (j, e) in row.iter().enumerate() {
                if let Some(e) = e {
                    constant.view_mut((r0, c0), (e.rows, e.cols)).copy_from(&e.constant);
                    terms.extend(e.terms.iter().map(|&(k, r, cc, v)| (k, r + r0, cc + c0, v)));
                }
                c0 += widths[j];
            }
            r0 += heights[i];
        }
        MatExpr {
            rows,
            cols,
            constant,
            terms,
        }
    }
}

/// Problem builder in linear-matrix-inequality form.
#[derive(Debug, Clone, Default)]
pub struct LmiBuilder {
    nvars: usize,
    objective: Affine,
    lmis: Vec<MatExpr>,
    settings: SdpSettings,
}

/// Solution of an [`LmiBuilder`] problem.
#[derive(Debug, Clone)]
pub struct LmiSolution {
    pub status: SdpStatus,
    /// Optimal value of the minimized objective.
    pub value: f64,
    /// Value certified by the primal (multiplier) side.
    pub dual_bound: f64,
    pub y: Vec<f64>,
    /// Lagrange multiplier matrix of each LMI, in insertion order.
    pub multipliers: Vec<CMat>,
    pub diagnostics: SdpDiagnostics,
}

impl LmiSolution {
    pub fn eval(&self, e: &MatExpr) -> CMat {
        e.eval(&self.y)
    }

    pub fn eval_affine(&self, a: &Affine) -> f64 {
        a.eval(&self.y)
    }

    /// Error unless the solve reached the tolerances (or `near_tol` when stalled).
    pub fn require_optimal(&self, what: &str) -> Result<()> {
        if matches!(self.status, SdpStatus::Optimal | SdpStatus::NearOptimal) {
            Ok(())
        } else {
            Err(Error::SolverFailure(format!(
                "{what}: status {:?} after {} iterations (gap {:.2e}, infeasibility {:.2e}/{:.2e})",
                self.status,
                self.diagnostics.iterations,
                self.diagnostics.relative_gap,
                self.diagnostics.primal_infeasibility,
                self.diagnostics.dual_infeasibility
            )))
        }
    }
}

impl LmiBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_settings(settings: SdpSettings) -> Self {
        Self {
            settings,
            ..Self::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.nvars
    }

    /// Fresh real scalar variable.
    pub fn scalar(&mut self) -> Affine {
        self.nvars += 1;
        Affine::var(self.nvars - 1)
    }

    /// Fresh Hermitian `n×n` matrix variable (`n²` real parameters).
    pub fn hermitian(&mut self, n: usize) -> MatExpr {
        let mut e = MatExpr::zeros(n, n);
        for i in 0..n {
            let k = self.scalar().terms[0].0;
            e.terms.push((k, i, i, c(1.0)));
        }
        self.push_offdiag(&mut e, n);
        e
    }

    /// Fresh Hermitian variable with fixed trace `t`.
    pub fn hermitian_with_trace(&mut self, n: usize, t: f64) -> MatExpr {
        let mut e = MatExpr::zeros(n, n);
        e.constant[(n - 1, n - 1)] = c(t);
        for i in 0..n - 1 {
            let k = self.scalar().terms[0].0;
            e.terms.push((k, i, i, c(1.0)));
            e.terms.push((k, n - 1, n - 1, c(-1.0)));
        }
        self.push_offdiag(&mut e, n);
        e
    }

    fn push_offdiag(&mut self, e: &mut MatExpr, n: usize) {
        for i in 0..n {
            for j in i + 1..n {
                let kr = self.scalar().terms[0].0;
                e.terms.push((kr, i, j, c(1.0)));
                e.terms.push((kr, j, i, c(1.0)));
                let ki = self.scalar().terms[0].0;
                e.terms.push((ki, i, j, C64::new(0.0, 1.0)));
                e.terms.push((ki, j, i, C64::new(0.0, -1.0)));
            }
        }
    }

    /// Fresh general complex `rows×cols` matrix variable.
    pub fn complex(&mut self, rows: usize, cols: usize) -> MatExpr {
        let mut e = MatExpr::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let kr = self.scalar().terms[0].0;
                e.terms.push((kr, i, j, c(1.0)));
                let ki = self.scalar().terms[0].0;
                e.terms.push((ki, i, j, C64::new(0.0, 1.0)));
            }
        }
        e
    }

    /// Constrain a Hermitian expression to be PSD; returns the LMI index.
    pub fn psd(&mut self, e: MatExpr) -> usize {
        assert_eq!(e.rows, e.cols, "LMI must be square");
        self.lmis.push(e);
        self.lmis.len() - 1
    }

    /// Constrain a scalar expression to be nonnegative; returns the LMI index.
    pub fn nonneg(&mut self, a: Affine) -> usize {
        self.psd(a.as_matrix())
    }

    pub fn minimize(&mut self, a: Affine) {
        self.objective = a;
    }

    /// Convert to standard form: `Z = C − Σ y_k A_k` with `C = F₀`, `A_k = −F_k`.
    pub fn to_problem(&self) -> Result<SdpProblem> {
        let mut block_dims = Vec::with_capacity(self.lmis.len());
        let mut cmat = Vec::with_capacity(self.lmis.len());
        let mut per_var: Vec<Vec<BlockTerm>> = vec![Vec::new(); self.nvars];
        for (bi, e) in self.lmis.iter().enumerate() {
            if linalg::hermitian_defect(&e.constant) > 1e-12 {
                return Err(Error::InvalidParameter(format!("LMI {bi} constant is not Hermitian")));
            }
            block_dims.push(e.rows);
            cmat.push(linalg::hermitize(&e.constant));
            let mut grouped: std::collections::BTreeMap<usize, std::collections::BTreeMap<(usize, usize), C64>> =
                Default::default();
            for &(k, r, cc, v) in &e.terms {
                *grouped
                    .entry(k)
                    .or_default()
                    .entry((r, cc))
                    .or_insert(C64::new(0.0, 0.0)) -= v;
            }
            for (k, ents) in grouped {
                let entries: Vec<(usize, usize, C64)> = ents
                    .into_iter()
                    .filter(|(_, v)| v.norm() > 0.0)
                    .map(|((r, cc), v)| (r, cc, v))
                    .collect();
                for &(r, cc, v) in &entries {
                    let other = entries
                        .iter()
                        .find(|&&(r2, c2, _)| r2 == cc && c2 == r)
                        .map(|e| e.2)
                        .unwrap_or(C64::new(0.0, 0.0));
                    if (v - other.conj()).norm() > 1e-12 {
                        return Err(Error::InvalidParameter(format!(
                            "LMI {bi} coefficient of variable {k} is not Hermitian"
                        )));
                    }
                }
                if !entries.is_empty() {
                    per_var[k].push(BlockTerm { block: bi, entries });
                }
            }
        }
        if let Some(k) = per_var.iter().position(|t| t.is_empty()) {
            return Err(Error::InvalidParameter(format!(
                "variable {k} does not appear in any constraint"
            )));
        }
        let mut b = vec![0.0; self.nvars];
        for &(k, v) in &self.objective.terms {
            b[k] -= v;
        }
        Ok(SdpProblem {
            block_dims,
            c: cmat,
            constraints: per_var,
            b,
            settings: self.settings,
        })
    }

    pub fn solve(&self) -> Result<LmiSolution> {
        let prob = self.to_problem()?;
        let sol = solve_sdp(&prob)?;
        Ok(LmiSolution {
            status: sol.status,
            value: self.objective.eval(&sol.y),
            dual_bound: -sol.primal_value + self.objective.constant,
            y: sol.y,
            multipliers: sol.x,
            diagnostics: sol.diagnostics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_of_matrix_above_identity() {
        let mut lb = LmiBuilder::new();
        let x = lb.hermitian(2);
        lb.psd(x.sub(&MatExpr::constant(linalg::eye(2))));
        lb.minimize(x.re_trace());
        let s = lb.solve().unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.value - 2.0).abs() < 1e-7, "{}", s.value);
    }

    #[test]
    fn standard_form_direct() {
        // minimize Tr X s.t. X_00 = 1, X_11 = 2  → 3
        let p = SdpProblem {
            block_dims: vec![2],
            c: vec![linalg::eye(2)],
            constraints: vec![
                vec![BlockTerm {
                    block: 0,
                    entries: vec![(0, 0, c(1.0))],
                }],
                vec![BlockTerm {
                    block: 0,
                    entries: vec![(1, 1, c(1.0))],
                }],
            ],
            b: vec![1.0, 2.0],
            settings: SdpSettings::default(),
        };
        let s = solve_sdp(&p).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.primal_value - 3.0).abs() < 1e-7);
        assert!((s.dual_value - 3.0).abs() < 1e-7);
    }

    #[test]
    fn largest_eigenvalue_by_lmi() {
        // minimize t s.t. t I − M ⪰ 0 gives λ_max(M)
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c(1.0);
        m[(0, 1)] = C64::new(0.0, 1.0);
        m[(1, 0)] = C64::new(0.0, -1.0);
        m[(1, 1)] = c(-1.0);
        let mut lb = LmiBuilder::new();
        let t = lb.scalar();
        lb.psd(
            t.as_matrix()
                .kron_left(&linalg::eye(2))
                .sub(&MatExpr::constant(m.clone())),
        );
        lb.minimize(t);
        let s = lb.solve().unwrap();
        assert!((s.value - 2f64.sqrt()).abs() < 1e-7, "{}", s.value);
    }
}
