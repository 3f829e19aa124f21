//! Density operators, pure states and the basic geometry of state space:
//! fidelity, purified distance, partial traces, purification and the
//! Uhlmann extension of a reduced state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64};

/// Validation tolerances for state construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest admissible entrywise deviation from Hermiticity.
    pub hermitian: f64,
    /// Smallest admissible eigenvalue is `-psd`.
    pub psd: f64,
    /// Slack on trace constraints.
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            psd: 1e-9,
            trace: 1e-9,
        }
    }
}

/// Whether an operator is a state (trace one) or a subnormalized operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateKind {
    Normalized,
    Subnormalized,
}

/// Hermitian PSD matrix with trace at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
    kind: StateKind,
}

impl DensityOperator {
    /// Validate a trace-one state with default tolerances.
    pub fn new(matrix: CMat) -> Result<Self> {
        Self::with_tolerances(matrix, StateKind::Normalized, &Tolerances::default())
    }

    /// Validate a subnormalized operator (trace in `[0, 1]`) with default tolerances.
    pub fn subnormalized(matrix: CMat) -> Result<Self> {
        Self::with_tolerances(matrix, StateKind::Subnormalized, &Tolerances::default())
    }

    /// Validate `matrix` against `tol`; the stored matrix is symmetrized.
    pub fn with_tolerances(matrix: CMat, kind: StateKind, tol: &Tolerances) -> Result<Self> {
        let (r, cdim) = matrix.shape();
        if r != cdim || r == 0 {
            return Err(Error::InvalidState(format!(
                "matrix must be square and non-empty, got {r}x{cdim}"
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let defect = linalg::hermitian_defect(&matrix);
        if defect > tol.hermitian {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
        }
        let matrix = linalg::hermitize(&matrix);
        let lmin = linalg::min_eig(&matrix);
        if lmin < -tol.psd {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {lmin:.3e})"
            )));
        }
        let tr = linalg::re_trace(&matrix);
        match kind {
            StateKind::Normalized if (tr - 1.0).abs() > tol.trace => {
                return Err(Error::InvalidState(format!("trace {tr} is not 1")));
            }
            StateKind::Subnormalized if tr > 1.0 + tol.trace => {
                return Err(Error::InvalidState(format!("trace {tr} exceeds 1")));
            }
            _ => {}
        }
        Ok(Self { matrix, kind })
    }

    /// Clean up a numerically produced operator: symmetrize, clip negative
    /// eigenvalues and, if requested, rescale to unit trace.
    pub fn from_numerical(matrix: &CMat, kind: StateKind) -> Result<Self> {
        let mut m = linalg::psd_part(matrix);
        let tr = linalg::re_trace(&m);
        match kind {
            StateKind::Normalized => {
                if tr <= 1e-300 {
                    return Err(Error::InvalidState("zero operator cannot be normalized".into()));
                }
                m /= c(tr);
            }
            StateKind::Subnormalized => {
                if tr > 1.0 {
                    m /= c(tr);
                }
            }
        }
        Ok(Self { matrix: m, kind })
    }

    /// Diagonal state from a probability (or subprobability) vector.
    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        let total: f64 = values.iter().sum();
        let m = linalg::diag(values);
        if (total - 1.0).abs() <= 1e-9 {
            Self::new(m)
        } else {
            Self::subnormalized(m)
        }
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: linalg::eye(dim) / c(dim as f64),
            kind: StateKind::Normalized,
        }
    }

    /// Computational basis state `|i⟩⟨i|`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut m = CMat::zeros(dim, dim);
        m[(i, i)] = c(1.0);
        Self {
            matrix: m,
            kind: StateKind::Normalized,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn is_normalized(&self) -> bool {
        self.kind == StateKind::Normalized
    }

    pub fn trace(&self) -> f64 {
        linalg::re_trace(&self.matrix)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::herm_eigvals(&self.matrix)
    }

    pub fn eigen(&self) -> linalg::HermEig {
        linalg::herm_eig(&self.matrix)
    }

    /// Tensor product `self ⊗ other`; normalized iff both factors are.
    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let kind = if self.is_normalized() && other.is_normalized() {
            StateKind::Normalized
        } else {
            StateKind::Subnormalized
        };
        DensityOperator {
            matrix: linalg::kron(&self.matrix, &other.matrix),
            kind,
        }
    }

    /// `n`-fold tensor power.
    pub fn tensor_power(&self, n: usize) -> DensityOperator {
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        out
    }

    /// Same matrix, flagged as subnormalized.
    pub fn as_subnormalized(&self) -> DensityOperator {
        DensityOperator {
            matrix: self.matrix.clone(),
            kind: StateKind::Subnormalized,
        }
    }

    /// Image under a unitary or isometry `v`: `v ρ v†`.
    pub fn conjugate(&self, v: &CMat) -> Result<DensityOperator> {
        if v.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.ncols(),
            });
        }
        Ok(DensityOperator {
            matrix: linalg::hermitize(&(v * &self.matrix * v.adjoint())),
            kind: self.kind,
        })
    }
}

/// Unit vector in `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVec,
}

impl PureState {
    pub fn new(amplitudes: CVec) -> Result<Self> {
        let n = amplitudes.norm();
        if amplitudes.is_empty() || (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("pure state must have unit norm, got {n}")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn normalized(v: CVec) -> Result<Self> {
        let n = v.norm();
        if n <= 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Self { amplitudes: v / c(n) })
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[i] = c(1.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: linalg::outer(&self.amplitudes),
            kind: StateKind::Normalized,
        }
    }
}

/// Factorization `dim = dim_a · dim_b` of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteShape {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteShape {
    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        Self { dim_a, dim_b }
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub(crate) fn check(&self, dim: usize) -> Result<()> {
        if self.dim_a == 0 || self.dim_b == 0 || self.dim() != dim {
            return Err(Error::ShapeMismatch {
                dim,
                dim_a: self.dim_a,
                dim_b: self.dim_b,
            });
        }
        Ok(())
    }
}

/// Subsystem of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

fn check_same_dim(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

/// `Tr √(√ρ σ √ρ)` without the subnormalization correction.
pub fn root_fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    Ok(root_fidelity_mat(rho.matrix(), sigma.matrix()))
}

/// Total order on matrices of equal shape, entry by entry.
fn entry_order(a: &CMat, b: &CMat) -> std::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Evaluated with the arguments in [`entry_order`] so that it is exactly symmetric.
pub(crate) fn root_fidelity_mat(rho: &CMat, sigma: &CMat) -> f64 {
    let (rho, sigma) = if entry_order(rho, sigma).is_gt() {
        (sigma, rho)
    } else {
        (rho, sigma)
    };
    let a = linalg::sqrt_psd_clean(rho);
    let b = linalg::sqrt_psd_clean(sigma);
    linalg::trace_norm(&(a * b))
}

/// Fidelity `F(ρ,σ) = Tr√(√ρσ√ρ) + √((1−Tr ρ)(1−Tr σ))`.
///
/// The trace-deficit term is added only when both operators are flagged
/// subnormalized.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let mut f = root_fidelity(rho, sigma)?;
    if rho.kind() == StateKind::Subnormalized && sigma.kind() == StateKind::Subnormalized {
        let d = (1.0 - rho.trace()).max(0.0) * (1.0 - sigma.trace()).max(0.0);
        f += d.sqrt();
    }
    Ok(f)
}

/// Fidelity of a pure state with an operator: `√⟨ψ|σ|ψ⟩`.
pub fn fidelity_pure(psi: &PureState, sigma: &DensityOperator) -> Result<f64> {
    if psi.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: sigma.dim(),
        });
    }
    let a = psi.amplitudes();
    let v = (a.adjoint() * sigma.matrix() * a)[(0, 0)].re;
    Ok(v.max(0.0).sqrt())
}

/// Purified distance from a fidelity value.
pub fn purified_distance_from_fidelity(f: f64) -> f64 {
    (1.0 - f * f).max(0.0).sqrt()
}

/// Purified distance `P(ρ,σ) = √(1 − F(ρ,σ)²)`.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok(purified_distance_from_fidelity(fidelity(rho, sigma)?))
}

/// Partial trace over `traced`, returning the operator on the other subsystem.
pub fn partial_trace(rho: &DensityOperator, shape: BipartiteShape, traced: Side) -> Result<DensityOperator> {
    shape.check(rho.dim())?;
    let m = match traced {
        Side::B => linalg::ptrace_b(rho.matrix(), shape.dim_a, shape.dim_b),
        Side::A => linalg::ptrace_a(rho.matrix(), shape.dim_a, shape.dim_b),
    };
    Ok(DensityOperator {
        matrix: linalg::hermitize(&m),
        kind: rho.kind(),
    })
}

/// Spectral purification `Σ_i √λ_i |i⟩ ⊗ |e_i⟩` on `ancilla ⊗ system`.
///
/// Tracing out the first factor (side A of shape `(dim, dim)`) recovers `rho`.
pub fn purify(rho: &DensityOperator) -> Result<PureState> {
    if !rho.is_normalized() {
        return Err(Error::InvalidState("purify expects a normalized state".into()));
    }
    let d = rho.dim();
    let eig = rho.eigen();
    let total: f64 = eig.values.iter().map(|x| x.max(0.0)).sum();
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        let w = (eig.values[i].max(0.0) / total).sqrt();
        for s in 0..d {
            v[i * d + s] = eig.vectors[(s, i)] * c(w);
        }
    }
    PureState::normalized(v)
}

/// Extend `rho_prime_a` to an operator on `A ⊗ B` whose fidelity with `rho_ab`
/// equals the fidelity of the A-marginals.
///
/// Both purifications live on `R ⊗ A ⊗ B` with `|R| = |A||B|`; the unitary on
/// the purifying system `R ⊗ B` that maximizes their overlap comes from the
/// singular value decomposition of the overlap matrix.
pub fn uhlmann_extension(
    rho_ab: &DensityOperator,
    shape: BipartiteShape,
    rho_prime_a: &DensityOperator,
) -> Result<DensityOperator> {
    shape.check(rho_ab.dim())?;
    if !rho_ab.is_normalized() {
        return Err(Error::InvalidState("rho_AB must be normalized".into()));
    }
    let (da, db) = (shape.dim_a, shape.dim_b);
    if rho_prime_a.dim() != da {
        return Err(Error::DimensionMismatch {
            expected: da,
            found: rho_prime_a.dim(),
        });
    }
    let dr = da * db;
    let e_dim = dr * db;
    let v = purify(rho_ab)?;
    let amp = v.amplitudes();
    // Rows: purifying system (r, b); columns: A.
    let mut m_v = CMat::zeros(e_dim, da);
    for r in 0..dr {
        for a in 0..da {
            for b in 0..db {
                m_v[(r * db + b, a)] = amp[r * da * db + a * db + b];
            }
        }
    }
    let eig = rho_prime_a.eigen();
    let mut m_u = CMat::zeros(e_dim, da);
    for i in 0..da {
        let w = eig.values[i].max(0.0).sqrt();
        for a in 0..da {
            m_u[(i, a)] = eig.vectors[(a, i)] * c(w);
        }
    }
    let k = &m_u * m_v.adjoint();
    let u = linalg::maximizing_unitary(&k)?;
    let m_w = &u * &m_u;
    let mut w = CVec::zeros(dr * da * db);
    for r in 0..dr {
        for a in 0..da {
            for b in 0..db {
                w[r * da * db + a * db + b] = m_w[(r * db + b, a)];
            }
        }
    }
    let full = linalg::outer(&w);
    let reduced = linalg::ptrace_a(&full, dr, da * db);
    Ok(DensityOperator {
        matrix: linalg::hermitize(&reduced),
        kind: rho_prime_a.kind(),
    })
}

/// Apply the channel `ρ ↦ Tr_E(V ρ V†)` where `v` maps `dim` into `out ⊗ env`.
pub fn apply_isometry_channel(rho: &DensityOperator, v: &CMat, out_dim: usize) -> Result<DensityOperator> {
    let big = rho.conjugate(v)?;
    let env = big.dim() / out_dim;
    partial_trace(&big, BipartiteShape::new(out_dim, env), Side::B)
}

/// Complex number helper re-exported for callers building literals.
pub fn cplx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus() -> DensityOperator {
        let v = CVec::from_vec(vec![c(1.0), c(1.0)]);
        PureState::normalized(v).unwrap().density()
    }

    #[test]
    fn fidelity_examples() {
        let zero = DensityOperator::basis(2, 0);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&zero, &plus()).unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
        let a = DensityOperator::from_diagonal(&[0.5, 0.5]).unwrap();
        let b = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        let oracle = (0.5f64 * 0.75).sqrt() + (0.5f64 * 0.25).sqrt();
        assert!((fidelity(&a, &b).unwrap() - oracle).abs() < 1e-10);
        assert!((purified_distance(&a, &b).unwrap() - 0.2588190).abs() < 1e-7);
        assert!(purified_distance(&a, &a).unwrap() < 1e-7);
    }

    #[test]
    fn subnormalized_extra_term() {
        let a = DensityOperator::from_diagonal(&[0.3, 0.2]).unwrap();
        assert_eq!(a.kind(), StateKind::Subnormalized);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-10);
        assert!((root_fidelity(&a, &a).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn validation_rejects_bad_input() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(DensityOperator::new(m).is_err());
        assert!(DensityOperator::new(linalg::diag(&[1.5, -0.5])).is_err());
        assert!(DensityOperator::new(linalg::diag(&[0.5, 0.4])).is_err());
        assert!(DensityOperator::subnormalized(linalg::diag(&[0.5, 0.4])).is_ok());
    }

    #[test]
    fn partial_trace_examples() {
        let a = DensityOperator::from_diagonal(&[0.7, 0.3]).unwrap();
        let b = plus();
        let ab = a.tensor(&b);
        let shape = BipartiteShape::new(2, 2);
        let ra = partial_trace(&ab, shape, Side::B).unwrap();
        assert!(linalg::max_abs_diff(ra.matrix(), a.matrix()) < 1e-14);
        let rb = partial_trace(&ab, shape, Side::A).unwrap();
        assert!(linalg::max_abs_diff(rb.matrix(), b.matrix()) < 1e-14);
        let bell = PureState::normalized(CVec::from_vec(vec![c(1.0), c(0.0), c(0.0), c(1.0)]))
            .unwrap()
            .density();
        let r = partial_trace(&bell, shape, Side::B).unwrap();
        assert!(linalg::max_abs_diff(r.matrix(), &(linalg::eye(2) * c(0.5))) < 1e-14);
        assert!(partial_trace(&bell, BipartiteShape::new(3, 2), Side::B).is_err());
    }

    #[test]
    fn purify_examples() {
        let zero = DensityOperator::basis(2, 0);
        let p = purify(&zero).unwrap();
        let back = partial_trace(&p.density(), BipartiteShape::new(2, 2), Side::A).unwrap();
        assert!(linalg::max_abs_diff(back.matrix(), zero.matrix()) < 1e-12);
        let mixed = DensityOperator::maximally_mixed(2);
        let p = purify(&mixed).unwrap();
        let schmidt = partial_trace(&p.density(), BipartiteShape::new(2, 2), Side::B)
            .unwrap()
            .eigenvalues();
        assert!((schmidt[0] - 0.5).abs() < 1e-12 && (schmidt[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uhlmann_examples() {
        let bell = PureState::normalized(CVec::from_vec(vec![c(1.0), c(0.0), c(0.0), c(1.0)]))
            .unwrap()
            .density();
        let shape = BipartiteShape::new(2, 2);
        let ext = uhlmann_extension(&bell, shape, &DensityOperator::maximally_mixed(2)).unwrap();
        assert!((fidelity(&ext, &bell).unwrap() - 1.0).abs() < 1e-9);
        let target = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        let ext = uhlmann_extension(&bell, shape, &target).unwrap();
        let marg = partial_trace(&ext, shape, Side::B).unwrap();
        assert!(linalg::max_abs_diff(marg.matrix(), target.matrix()) < 1e-9);
        let lhs = fidelity(&ext, &bell).unwrap();
        let rhs = fidelity(&target, &DensityOperator::maximally_mixed(2)).unwrap();
        assert!((lhs - rhs).abs() < 1e-9, "{lhs} {rhs}");
    }
}
