//! One function per subcommand; each returns an [`Outcome`] for the writer.

use std::fs;
use std::time::Instant;

use log::{info, warn};
use oneshot_rsp::divergences::{self, Ensemble};
use oneshot_rsp::locc::{self, BoundCheck, FuzzLimits, FuzzReport, LoccProtocol};
use oneshot_rsp::nets::{self, Direction, Net, NetOrder, TransferRecord};
use oneshot_rsp::rsp::{self, BoundReport, ErrorMode, GapRecord, RspOutcome};
use oneshot_rsp::selftest::{self, SelftestConfig, SelftestReport};
use oneshot_rsp::smoothing::{self, SmoothingMode};
use oneshot_rsp::{hypothesis, io, DensityOperator};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, Mode, Order, RunConfig};
use crate::output::{self, extended_real, Outcome, Quantity};
use crate::CliError;

/// Largest number of states whose ordered pairs `entropy` reports.
pub const PAIR_STATES: usize = 4;
/// Grid size of the observational divergence.
pub const D_OBS_GRID: usize = 200;

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    match &config.command {
        Command::Entropy => entropy(config),
        Command::Bounds { corrupt_upper } => bounds(config, *corrupt_upper),
        Command::Locc {
            protocol,
            n_bits,
            p,
            trials,
            fuzz,
        } => locc_cmd(config, protocol.as_deref(), *n_bits, *p, *trials, *fuzz),
        Command::Jrs { mode, trials } => jrs(config, *mode, *trials),
        Command::Net { order } => net(config, *order),
        Command::Gap { n_bits } => gap(config, *n_bits),
        Command::Selftest { criteria } => selftest_cmd(config, criteria.as_deref()),
    }
}

fn load_ensemble(config: &RunConfig) -> Result<Ensemble, CliError> {
    let path = config
        .ensemble
        .as_deref()
        .ok_or_else(|| CliError::Config("--ensemble is required for this command".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
    let e = io::parse_ensemble(&text)?;
    info!("loaded {} states of dimension {} from {path}", e.len(), e.dim());
    Ok(e)
}

/// The ensemble with uniform weights when the file gives none.
fn weighted(e: Ensemble) -> Result<Ensemble, CliError> {
    if e.weights().is_some() {
        return Ok(e);
    }
    let n = e.len();
    Ok(e.with_weights(vec![1.0 / n as f64; n])?)
}

#[derive(Serialize)]
struct EntropyReport {
    dim: usize,
    states: usize,
    weights: Vec<f64>,
    uniform_weights: bool,
    /// Ordered pairs `(i, j)` are reported for states `i, j < pair_states`.
    pair_states: usize,
    quantities: Vec<Quantity>,
}

fn pair_quantities(a: &DensityOperator, b: &DensityOperator, tag: &str, eps: f64) -> Result<Vec<Quantity>, CliError> {
    let mut q = vec![
        Quantity::new(
            format!("relative_entropy{tag}"),
            divergences::relative_entropy(a, b)?,
            None,
        ),
        Quantity::new(format!("d_max{tag}"), divergences::d_max(a, b)?, None),
        Quantity::new(format!("d_obs{tag}"), divergences::d_obs(a, b, D_OBS_GRID)?, None),
        Quantity::new(
            format!("smooth_d_max{tag}"),
            smoothing::smooth_d_max(a, b, eps)?,
            Some(eps),
        ),
    ];
    if eps < 1.0 {
        let (beta, _) = hypothesis::beta_eps(a, b, eps)?;
        q.push(Quantity::new(format!("beta{tag}"), beta, Some(eps)));
        q.push(Quantity::new(
            format!("d_h{tag}"),
            hypothesis::d_h_from_beta(beta, eps),
            Some(eps),
        ));
    }
    Ok(q)
}

fn entropy(config: &RunConfig) -> Result<Outcome, CliError> {
    let eps = config.eps();
    let raw = load_ensemble(config)?;
    let uniform_weights = raw.weights().is_none();
    let e = weighted(raw)?;
    let mut quantities = Vec::new();
    for (i, s) in e.states().iter().enumerate() {
        quantities.push(Quantity::new(
            format!("entropy[{i}]"),
            divergences::von_neumann(s)?,
            None,
        ));
    }
    quantities.push(Quantity::new("holevo", divergences::holevo(&e)?, None));
    let t = divergences::t_of_q(&e, 1e-10, 10_000)?;
    quantities.push(Quantity::new("t_of_q", t.value, None));
    quantities.push(Quantity::new("i_max", divergences::i_max_cq(&e)?, None));
    let smooth = smoothing::smooth_i_max_cq(&e, eps, SmoothingMode::FixedMarginal)?;
    quantities.push(Quantity::new("smooth_i_max", smooth.value, Some(eps)));
    let k = e.len().min(PAIR_STATES);
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let states = e.states();
    let per_pair = pairs
        .par_iter()
        .map(|&(i, j)| pair_quantities(&states[i], &states[j], &format!("[{i},{j}]"), eps))
        .collect::<Result<Vec<_>, _>>()?;
    quantities.extend(per_pair.into_iter().flatten());
    let csv = output::csv_from_quantities(&quantities);
    let report = EntropyReport {
        dim: e.dim(),
        states: e.len(),
        weights: e.require_weights()?.to_vec(),
        uniform_weights,
        pair_states: k,
        quantities,
    };
    let mut outcome = Outcome::new(report, true)?;
    outcome.csv = Some(csv);
    Ok(outcome)
}

#[derive(Serialize)]
struct BoundsReport {
    average_case: BoundReport,
    worst_case: BoundReport,
    holds: bool,
}

fn corrupt(r: &mut BoundReport) {
    r.upper_bits = r.achieved_bits - 1.0;
    r.ordered = false;
    r.notes.push("upper bound corrupted by test hook".into());
}

fn bounds(config: &RunConfig, corrupt_upper: bool) -> Result<Outcome, CliError> {
    let eps = config.eps();
    let delta = config.delta.unwrap_or((1.0 - eps * eps) / 2.0);
    let e = weighted(load_ensemble(config)?)?;
    let (avg, worst) = rayon::join(
        || rsp::average_case_bracket(&e, eps),
        || rsp::worst_case_bracket(&e, eps, delta),
    );
    let (mut avg, mut worst) = (avg?, worst?);
    if corrupt_upper {
        corrupt(&mut avg);
        corrupt(&mut worst);
    }
    let holds = avg.holds() && worst.holds();
    for r in [&avg, &worst] {
        if !r.holds() {
            warn!("{} bracket fails: {:?}", r.mode, r);
        }
    }
    let csv = format!(
        "{}\n{}\n{}\n",
        BoundReport::csv_header(),
        avg.csv_row(),
        worst.csv_row()
    );
    let mut outcome = Outcome::new(
        BoundsReport {
            average_case: avg,
            worst_case: worst,
            holds,
        },
        holds,
    )?;
    outcome.csv = Some(csv);
    Ok(outcome)
}

#[derive(Serialize)]
struct SampledSummary {
    trials: usize,
    successes: usize,
    success: f64,
}

#[derive(Serialize)]
struct LoccReport {
    source: String,
    check: BoundCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled: Option<SampledSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fuzz: Option<FuzzReport>,
    holds: bool,
    protocol: LoccProtocol,
}

fn locc_cmd(
    config: &RunConfig,
    path: Option<&std::path::Path>,
    n_bits: u32,
    p: f64,
    trials: usize,
    fuzz: usize,
) -> Result<Outcome, CliError> {
    let (protocol, source) = match path {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            (LoccProtocol::from_json(&text)?, path.display().to_string())
        }
        None => (
            locc::baseline_protocol(n_bits, p)?,
            format!("baseline(n={n_bits}, p={p})"),
        ),
    };
    let check = locc::check_bound(&protocol)?;
    let sampled = if trials > 0 {
        let run = locc::run_sampled(&protocol, trials, config.seed)?;
        Some(SampledSummary {
            trials: run.trials,
            successes: run.successes,
            success: run.success,
        })
    } else {
        None
    };
    let fuzz = if fuzz > 0 {
        let limits = FuzzLimits::default();
        let checks = (0..fuzz)
            .into_par_iter()
            .map(|i| locc::fuzz_check(i, config.seed, &limits))
            .collect::<Result<Vec<_>, _>>()?;
        Some(FuzzReport::from_checks(&checks, &limits))
    } else {
        None
    };
    let holds = check.holds && fuzz.as_ref().is_none_or(|f| f.violations == 0);
    let report = LoccReport {
        source,
        check,
        sampled,
        fuzz,
        holds,
        protocol,
    };
    let mut outcome = Outcome::new(&report, holds)?;
    if let serde_json::Value::Object(map) = &mut outcome.report {
        let mut summary = map.clone();
        summary.remove("protocol");
        outcome.csv = Some(output::csv_from_quantities(&output::flatten(
            &serde_json::Value::Object(summary),
            None,
        )));
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct OutcomeSummary {
    fidelities: Vec<f64>,
    achieved_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure_fractions: Option<Vec<f64>>,
}

impl From<&RspOutcome> for OutcomeSummary {
    fn from(o: &RspOutcome) -> Self {
        Self {
            fidelities: o.fidelities.clone(),
            achieved_error: o.achieved_error,
            oracle_residual: o.oracle_residual,
            failure_fractions: o.failure_fractions.clone(),
        }
    }
}

#[derive(Serialize)]
struct JrsReport {
    mode: Mode,
    #[serde(serialize_with = "extended_real")]
    smoothed_value: f64,
    lambda: f64,
    t: usize,
    cost_bits: u32,
    cost_bound: f64,
    failure_probability: f64,
    unitary_residual: f64,
    exact: OutcomeSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled: Option<OutcomeSummary>,
    within_error: bool,
}

fn jrs(config: &RunConfig, mode: Mode, trials: usize) -> Result<Outcome, CliError> {
    let eps = config.eps();
    let raw = load_ensemble(config)?;
    let (run, error_mode) = match mode {
        Mode::Average => {
            let e = weighted(raw.clone())?;
            let w = e.require_weights()?.to_vec();
            (rsp::avg_case_protocol(&e, eps)?, ErrorMode::AverageCase(w))
        }
        Mode::Worst => (rsp::worst_case_protocol(&raw, eps)?, ErrorMode::WorstCase),
    };
    let sampled = if trials > 0 {
        let mut o = rsp::simulate_jrs_sampled(&run.instance, trials, config.seed)?;
        o.evaluate(raw.states(), error_mode)?;
        Some(OutcomeSummary::from(&o))
    } else {
        None
    };
    let report = JrsReport {
        mode,
        smoothed_value: run.smoothed_value,
        lambda: run.lambda,
        t: run.t,
        cost_bits: run.cost_bits,
        cost_bound: run.cost_bound,
        failure_probability: run.instance.failure_probability(),
        unitary_residual: run.instance.unitary_residual(),
        exact: OutcomeSummary::from(&run.outcome),
        sampled,
        within_error: run.within_error,
    };
    Outcome::new(report, run.within_error)
}

#[derive(Serialize)]
struct NetReport {
    #[serde(flatten)]
    net: Net,
    net_labels: Vec<String>,
    coverage_radius: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    transfer: Vec<TransferRecord>,
}

fn net(config: &RunConfig, order: Order) -> Result<Outcome, CliError> {
    let nu = config.nu.expect("nu is defaulted for this command");
    let e = load_ensemble(config)?;
    let order = match order {
        Order::Index => NetOrder::Index,
        Order::Label => NetOrder::Label,
    };
    let built = nets::build_net_ordered(&e, nu, order)?;
    let coverage_radius = nets::coverage_radius(&e, &built)?;
    let net_labels = built.net_indices.iter().map(|&i| e.labels()[i].clone()).collect();
    let mut transfer = Vec::new();
    if let Some(eps) = config.epsilon {
        let w = weighted(e.clone())?;
        let (avg, worst) = rayon::join(
            || nets::transfer_brackets(&w, eps, nu, Direction::AverageCase),
            || nets::transfer_brackets(&e, eps, nu, Direction::WorstCase),
        );
        transfer.push(avg?);
        transfer.push(worst?);
    }
    let ok = transfer.iter().all(|r| r.ok);
    Outcome::new(
        NetReport {
            net: built,
            net_labels,
            coverage_radius,
            transfer,
        },
        ok,
    )
}

/// The gap record passes when every verified quantity matches its formula.
fn gap_ok(g: &GapRecord) -> bool {
    let reduction_ok = g.reduction.as_ref().is_none_or(|r| r.ok);
    g.skewed_error_ok && g.geometric_error_ok && reduction_ok && f64::from(g.geometric_cost) <= g.geometric_bound
}

fn gap(config: &RunConfig, n_bits: u32) -> Result<Outcome, CliError> {
    let g = rsp::gap_demo(n_bits, config.eps())?;
    let ok = gap_ok(&g);
    Outcome::new(g, ok)
}

fn selftest_cmd(config: &RunConfig, only: Option<&[u32]>) -> Result<Outcome, CliError> {
    let st = SelftestConfig {
        seed: config.seed,
        tol_scale: config.tol,
    };
    let ids: Vec<u32> = only.map_or_else(|| selftest::CRITERIA.to_vec(), <[u32]>::to_vec);
    let start = Instant::now();
    let results: Vec<_> = ids.par_iter().map(|&id| selftest::run_criterion(id, st)).collect();
    let report = SelftestReport::from_results(st, results);
    for r in &report.criteria {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        let timing = if r.within_time() { "" } else { " (over time budget)" };
        eprintln!(
            "criterion {:>2} {verdict} {:>8.2}s{timing}  {} (checks {}, failures {}, worst {:.3e}, tol {:.1e})",
            r.id,
            r.elapsed.as_secs_f64(),
            r.name,
            r.checks,
            r.failures,
            r.worst,
            r.tolerance
        );
        for d in &r.details {
            eprintln!("    {d}");
        }
    }
    eprintln!(
        "selftest {} in {:.2}s",
        if report.passed { "passed" } else { "FAILED" },
        start.elapsed().as_secs_f64()
    );
    let ok = report.passed;
    Outcome::new(report, ok)
}
