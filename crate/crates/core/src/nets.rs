//! ν-nets over finite ensembles and the transfer of protocols between an
//! ensemble and its net.
//!
//! A greedy pass selects net points so that every source state lies at
//! purified distance `< ν` from its assigned point. A protocol for the net
//! then serves the source by running it on the assigned point: in the worst
//! case the error grows by at most `ν`, and in the average case, with the
//! induced distribution on the net, by at most `ν` as well.

use serde::{Deserialize, Serialize};

use crate::divergences::Ensemble;
use crate::error::{Error, Result};
use crate::operators::{self, DensityOperator};
use crate::random::{self, rng_for};
use crate::rsp::{self, ErrorMode, ERROR_TOL};

/// Largest dimension accepted by [`sample_states`].
pub const MAX_SAMPLE_DIM: usize = 8;

/// Order in which the greedy pass visits the source states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetOrder {
    /// Index order of the ensemble.
    Index,
    /// Lexicographic order of the labels (ties by index).
    Label,
}

/// A ν-net given by indices into a source ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub nu: f64,
    /// Source indices of the net points, in selection order.
    pub net_indices: Vec<usize>,
    /// For every source state, the position in `net_indices` of its point.
    pub assignment: Vec<usize>,
    /// Source weight carried by every net point, when the source is weighted.
    pub induced_weights: Option<Vec<f64>>,
}

impl Net {
    pub fn len(&self) -> usize {
        self.net_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.net_indices.is_empty()
    }

    /// The net as an ensemble, weighted by the induced distribution if present.
    pub fn ensemble(&self, source: &Ensemble) -> Result<Ensemble> {
        let states: Vec<DensityOperator> = self.net_indices.iter().map(|&i| source.states()[i].clone()).collect();
        let labels = self.net_indices.iter().map(|&i| source.labels()[i].clone()).collect();
        Ensemble::new(labels, states, self.induced_weights.clone())
    }
}

/// Greedy ν-net in index order; see [`build_net_ordered`].
pub fn build_net(ensemble: &Ensemble, nu: f64) -> Result<Net> {
    build_net_ordered(ensemble, nu, NetOrder::Index)
}

/// Greedy ν-net: a state becomes a net point iff no earlier point lies at
/// purified distance `< ν`; each state is assigned the earliest point at
/// distance `< ν` (itself, for net points).
pub fn build_net_ordered(ensemble: &Ensemble, nu: f64, order: NetOrder) -> Result<Net> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::InvalidParameter(format!("nu must lie in [0,1], got {nu}")));
    }
    let states = ensemble.states();
    let mut visit: Vec<usize> = (0..states.len()).collect();
    if order == NetOrder::Label {
        let labels = ensemble.labels();
        visit.sort_by(|&a, &b| labels[a].cmp(&labels[b]).then(a.cmp(&b)));
    }
    let mut net_indices: Vec<usize> = Vec::new();
    let mut assignment = vec![0usize; states.len()];
    for &s in &visit {
        let mut found = None;
        for (pos, &p) in net_indices.iter().enumerate() {
            if operators::purified_distance(&states[s], &states[p])? < nu {
                found = Some(pos);
                break;
            }
        }
        assignment[s] = match found {
            Some(pos) => pos,
            None => {
                net_indices.push(s);
                net_indices.len() - 1
            }
        };
    }
    let mut net = Net {
        nu,
        net_indices,
        assignment,
        induced_weights: None,
    };
    if ensemble.weights().is_some() {
        net.induced_weights = Some(induced_distribution(ensemble, &net)?);
    }
    Ok(net)
}

/// `p(ρ_i) = Σ_{s : f(s) = i} p_s`.
pub fn induced_distribution(ensemble: &Ensemble, net: &Net) -> Result<Vec<f64>> {
    let w = ensemble.require_weights()?;
    if net.assignment.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: net.assignment.len(),
        });
    }
    let mut out = vec![0.0; net.len()];
    for (s, &pos) in net.assignment.iter().enumerate() {
        out[pos] += w[s];
    }
    Ok(out)
}

/// Largest purified distance between a source state and its net point.
pub fn coverage_radius(ensemble: &Ensemble, net: &Net) -> Result<f64> {
    let states = ensemble.states();
    let mut worst: f64 = 0.0;
    for (s, &pos) in net.assignment.iter().enumerate() {
        worst = worst.max(operators::purified_distance(&states[s], &states[net.net_indices[pos]])?);
    }
    Ok(worst)
}

/// Which error notion a transfer concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    WorstCase,
    AverageCase,
}

/// Costs and errors of protocols moved from a net to its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub direction: Direction,
    pub epsilon: f64,
    pub nu: f64,
    pub net_size: usize,
    /// Cost of the construction on the net at error `ε`.
    pub left_bits: f64,
    /// Cost of the construction on the net at error `ε − ν` (worst case, `ν < ε` only).
    pub right_bits: Option<f64>,
    /// Error on the source of the net protocol run on assigned points.
    pub composed_error: f64,
    /// The error the transfer guarantees for `composed_error`.
    pub error_bound: f64,
    /// Which sides are backed by a protocol verified on the source.
    pub certified: String,
    pub ordered: bool,
    pub ok: bool,
}

/// Serve every source state with the output produced for its net point.
fn compose(net: &Net, outputs: &[DensityOperator]) -> Vec<DensityOperator> {
    net.assignment.iter().map(|&pos| outputs[pos].clone()).collect()
}

/// Evaluate the transfer between `ensemble` and its greedy ν-net.
///
/// Worst case: the net construction at `ε` gives the left cost; when
/// `ν < ε`, the net construction at `ε − ν` gives the right cost and, run on
/// assigned points, must reach error `ε` on the source. Average case: the net
/// construction at `ε` with the induced distribution, run on assigned points,
/// must reach average error `ε + ν` on the source.
pub fn transfer_brackets(ensemble: &Ensemble, eps: f64, nu: f64, direction: Direction) -> Result<TransferRecord> {
    let net = build_net(ensemble, nu)?;
    let net_ens = net.ensemble(ensemble)?;
    match direction {
        Direction::WorstCase => {
            let left = rsp::worst_case_protocol(&net_ens, eps)?;
            let mut record = TransferRecord {
                direction,
                epsilon: eps,
                nu,
                net_size: net.len(),
                left_bits: left.cost_bits as f64,
                right_bits: None,
                composed_error: f64::NAN,
                error_bound: eps,
                certified: "none".into(),
                ordered: true,
                ok: left.within_error,
            };
            let source_eps = if nu < eps { eps - nu } else { eps };
            let run = if nu < eps {
                rsp::worst_case_protocol(&net_ens, source_eps)?
            } else {
                left
            };
            let mut outcome = run.outcome.clone();
            outcome.outputs = compose(&net, &run.outcome.outputs);
            outcome.evaluate(ensemble.states(), ErrorMode::WorstCase)?;
            record.composed_error = outcome.achieved_error;
            if nu < eps {
                record.right_bits = Some(run.cost_bits as f64);
                record.ordered = record.left_bits <= run.cost_bits as f64;
                record.certified = "right".into();
                record.ok &= run.within_error && outcome.achieved_error <= eps + ERROR_TOL;
            } else {
                record.error_bound = eps + nu;
                record.ok &= outcome.achieved_error <= eps + nu + ERROR_TOL;
            }
            record.ok &= record.ordered;
            Ok(record)
        }
        Direction::AverageCase => {
            let run = rsp::avg_case_protocol(&net_ens, eps)?;
            let mut outcome = run.outcome.clone();
            outcome.outputs = compose(&net, &run.outcome.outputs);
            outcome.evaluate(
                ensemble.states(),
                ErrorMode::AverageCase(ensemble.require_weights()?.to_vec()),
            )?;
            let ok = run.within_error && outcome.achieved_error <= eps + nu + ERROR_TOL;
            Ok(TransferRecord {
                direction,
                epsilon: eps,
                nu,
                net_size: net.len(),
                left_bits: run.cost_bits as f64,
                right_bits: None,
                composed_error: outcome.achieved_error,
                error_bound: eps + nu,
                certified: "composed".into(),
                ordered: true,
                ok,
            })
        }
    }
}

/// Kind of random state drawn by [`sample_states`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleKind {
    HaarPure,
    HilbertSchmidtMixed,
}

/// `count` random states of dimension `dim`; state `i` uses `rng_for(seed, i)`.
pub fn sample_states(dim: usize, count: usize, kind: SampleKind, seed: u64) -> Result<Vec<DensityOperator>> {
    if dim == 0 || dim > MAX_SAMPLE_DIM {
        return Err(Error::InvalidParameter(format!(
            "dim must lie in 1..={MAX_SAMPLE_DIM}, got {dim}"
        )));
    }
    Ok((0..count)
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            match kind {
                SampleKind::HaarPure => random::haar_pure(&mut rng, dim),
                SampleKind::HilbertSchmidtMixed => random::hs_mixed(&mut rng, dim),
            }
        })
        .collect())
}
