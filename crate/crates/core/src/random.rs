//! Seeded samplers for states, unitaries, channels and probability vectors.
//!
//! Every sampler takes an explicit RNG so that callers control determinism;
//! [`rng_for`] derives an independent ChaCha stream from a `(seed, index)` pair.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{self, c, CMat, CVec, C64};
use crate::operators::{DensityOperator, PureState};

/// Independent generator for task `index` under master `seed`.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_c(rng))
}

/// Haar-random unit vector.
pub fn haar_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    loop {
        let v = CVec::from_fn(dim, |_, _| gaussian_c(rng));
        if let Ok(p) = PureState::normalized(v) {
            return p;
        }
    }
}

/// Haar-random pure state as a density operator.
pub fn haar_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    haar_vector(rng, dim).density()
}

/// Hilbert–Schmidt random mixed state `GG†/Tr(GG†)` with square Ginibre `G`.
pub fn hs_mixed<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = ginibre(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = linalg::re_trace(&m);
    DensityOperator::new(linalg::hermitize(&(m / c(tr)))).expect("Ginibre state is valid")
}

/// Random state: Haar pure or Hilbert–Schmidt mixed with equal probability.
pub fn any_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    if rng.gen_bool(0.5) {
        haar_pure(rng, dim)
    } else {
        hs_mixed(rng, dim)
    }
}

/// Full-rank random state (Hilbert–Schmidt, mixed with a small multiple of the identity).
pub fn full_rank_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let m = hs_mixed(rng, dim).into_matrix() * c(0.95) + linalg::eye(dim) * c(0.05 / dim as f64);
    DensityOperator::new(m).expect("mixture of states is a state")
}

/// Columns of a Haar-random isometry `C^cols → C^rows` (QR of a Ginibre matrix).
pub fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let g = ginibre(rng, rows, cols);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q.columns(0, cols).into_owned();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / c(d.norm()) } else { c(1.0) };
        for i in 0..rows {
            out[(i, j)] *= phase;
        }
    }
    out
}

/// Haar-random unitary.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    haar_isometry(rng, dim, dim)
}

/// Probability vector from normalized exponential draws (flat Dirichlet).
pub fn probability_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}
