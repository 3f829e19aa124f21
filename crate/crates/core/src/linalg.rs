//! Dense complex matrix helpers: Hermitian eigendecomposition, matrix functions,
//! Kronecker products and partial traces.
//!
//! All routines work on `nalgebra` matrices with `Complex64` entries and are
//! intended for the small dimensions (at most a few hundred) used in this crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Shorthand for a real complex number.
#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: CMat,
}

impl HermEig {
    /// Rebuild `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Isometry whose columns span the eigenvectors with eigenvalue above `thr`,
    /// together with those eigenvalues.
    pub fn support(&self, thr: f64) -> (CMat, Vec<f64>) {
        let idx: Vec<usize> = (0..self.values.len()).filter(|&i| self.values[i] > thr).collect();
        let n = self.vectors.nrows();
        let mut v = CMat::zeros(n, idx.len());
        for (k, &i) in idx.iter().enumerate() {
            v.set_column(k, &self.vectors.column(i));
        }
        (v, idx.iter().map(|&i| self.values[i]).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// `(m + m†)/2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Hermitian eigendecomposition (the input is symmetrized first).
pub fn herm_eig(m: &CMat) -> HermEig {
    let n = m.nrows();
    if n == 0 {
        return HermEig {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        };
    }
    let h = hermitize(m);
    let eig = h.clone().symmetric_eigen();
    let mut v = eig.eigenvectors;
    let mut a = hermitize(&(v.adjoint() * &h * &v));
    jacobi_polish(&mut a, &mut v);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        values.push(a[(i, i)].re);
        vectors.set_column(k, &v.column(i));
    }
    HermEig { values, vectors }
}

/// Cyclic complex Jacobi sweeps that diagonalize the nearly diagonal
/// Hermitian `a` in place, accumulating the rotations into `v`.
fn jacobi_polish(a: &mut CMat, v: &mut CMat) {
    let n = a.nrows();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..12 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-3 * f64::EPSILON * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let nb = b.norm();
                if nb == 0.0 {
                    continue;
                }
                let phase = b / nb;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * nb);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on coordinates (p, q).
                let g_pp = c(cs);
                let g_pq = c(sn);
                let g_qp = -phase.conj() * sn;
                let g_qq = phase.conj() * cs;
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * g_pp + y * g_qp;
                    a[(k, q)] = x * g_pq + y * g_qq;
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * g_pp + y * g_qp;
                    v[(k, q)] = x * g_pq + y * g_qq;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = g_pp.conj() * x + g_qp.conj() * y;
                    a[(q, k)] = g_pq.conj() * x + g_qq.conj() * y;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn herm_eigvals(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    herm_eig(m).values
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig(m: &CMat) -> f64 {
    herm_eigvals(m).first().copied().unwrap_or(0.0)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eig(m: &CMat) -> f64 {
    herm_eigvals(m).last().copied().unwrap_or(0.0)
}

/// Square root of a PSD matrix; negative eigenvalues are clamped to zero.
pub fn sqrt_psd(m: &CMat) -> CMat {
    herm_eig(m).map(|x| x.max(0.0).sqrt())
}

/// Square root of a PSD matrix with eigenvalues below the rounding floor
/// (`64·ε·λ_max`) set to zero, so that noise does not contribute `√ε` terms.
pub fn sqrt_psd_clean(m: &CMat) -> CMat {
    let eig = herm_eig(m);
    let floor = 64.0 * f64::EPSILON * eig.max().abs().max(f64::MIN_POSITIVE);
    eig.map(|x| if x > floor { x.sqrt() } else { 0.0 })
}

/// Projection of a Hermitian matrix onto the PSD cone.
pub fn psd_part(m: &CMat) -> CMat {
    herm_eig(m).map(|x| x.max(0.0))
}

/// Real part of `Tr(a b)`.
pub fn re_trace_prod(a: &CMat, b: &CMat) -> f64 {
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            let x = a[(i, k)] * b[(k, i)];
            s += x.re;
        }
    }
    s
}

/// Real part of the trace.
pub fn re_trace(a: &CMat) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Identity matrix of size `n`.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Diagonal matrix from real entries.
pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    let mut m = CMat::zeros(n, n);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = c(v);
    }
    m
}

/// Rank-one projector `|v⟩⟨v|`.
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Partial trace of `m` (on `dim_a ⊗ dim_b`) over subsystem B, keeping A.
pub fn ptrace_b(m: &CMat, dim_a: usize, dim_b: usize) -> CMat {
    let mut out = CMat::zeros(dim_a, dim_a);
    for i in 0..dim_a {
        for j in 0..dim_a {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..dim_b {
                s += m[(i * dim_b + k, j * dim_b + k)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Partial trace of `m` (on `dim_a ⊗ dim_b`) over subsystem A, keeping B.
pub fn ptrace_a(m: &CMat, dim_a: usize, dim_b: usize) -> CMat {
    let mut out = CMat::zeros(dim_b, dim_b);
    for i in 0..dim_b {
        for j in 0..dim_b {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..dim_a {
                s += m[(k * dim_b + i, k * dim_b + j)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Singular value decomposition `m = u Σ v†` with full unitary factors.
///
/// The thin decomposition from nalgebra is completed to unitaries by
/// Gram–Schmidt on the standard basis, which is what the Uhlmann constructions need.
pub fn svd_full(m: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let (r, cdim) = m.shape();
    let svd = m.clone().svd(true, true);
    let u = svd
        .u
        .ok_or_else(|| Error::NumericalFailure("SVD did not return U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD did not return V".into()))?;
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("SVD produced non-finite values".into()));
    }
    Ok((complete_unitary(&u, r), s, complete_unitary(&v_t.adjoint(), cdim)))
}

/// Extend a matrix with orthonormal columns to a square unitary.
pub fn complete_unitary(cols: &CMat, n: usize) -> CMat {
    let mut basis: Vec<CVec> = Vec::with_capacity(n);
    for j in 0..cols.ncols() {
        basis.push(cols.column(j).into_owned());
    }
    let mut e = 0;
    while basis.len() < n && e < n {
        let mut v = CVec::zeros(n);
        v[e] = c(1.0);
        e += 1;
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            basis.push(v / c(nrm));
        }
    }
    let mut out = CMat::zeros(n, n);
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Unitary `U` maximizing `Re Tr(U k)`, i.e. the polar factor `R P†` of `k = P Σ R†`.
pub fn maximizing_unitary(k: &CMat) -> Result<CMat> {
    let (p, _s, r) = svd_full(k)?;
    Ok(&r * p.adjoint())
}

/// Trace norm (sum of singular values).
pub fn trace_norm(m: &CMat) -> f64 {
    m.clone().singular_values().iter().sum()
}
