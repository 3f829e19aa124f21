//! Command-line arguments and the run configuration embedded in reports.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "oneshot-rsp", version, about = "One-shot remote state preparation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Ensemble JSON file.
    #[arg(long, global = true, value_name = "PATH")]
    pub ensemble: Option<PathBuf>,
    /// Target error ε.
    #[arg(long, global = true, value_name = "F")]
    pub epsilon: Option<f64>,
    /// Slack δ of the worst-case lower bound.
    #[arg(long, global = true, value_name = "F")]
    pub delta: Option<f64>,
    /// Net radius ν.
    #[arg(long, global = true, value_name = "F")]
    pub nu: Option<f64>,
    /// Master seed for every random choice.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    /// Multiplier applied to the self-test tolerances.
    #[arg(long, global = true, value_name = "F", default_value_t = 1.0)]
    pub tol: f64,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Average,
    Worst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Index,
    Label,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "lowercase", tag = "command")]
pub enum Command {
    /// Entropic quantities of an ensemble and of its state pairs.
    Entropy,
    /// Average-case and worst-case cost brackets.
    Bounds {
        /// Test hook: report an upper bound below the achieved cost.
        #[arg(long, hide = true)]
        #[serde(skip_serializing_if = "std::ops::Not::not")]
        corrupt_upper: bool,
    },
    /// LOCC bit-transmission bound: a protocol file, the baseline, or a fuzz campaign.
    Locc {
        /// Protocol JSON file; the baseline protocol is used when absent.
        #[arg(long, value_name = "PATH")]
        protocol: Option<PathBuf>,
        /// Bits to transmit (baseline).
        #[arg(long, default_value_t = 4)]
        n_bits: u32,
        /// Target success probability (baseline).
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Monte-Carlo trials in addition to the exact run.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        /// Number of random protocols to check.
        #[arg(long, default_value_t = 0)]
        fuzz: usize,
    },
    /// Build and simulate the rejection-sampling protocol.
    Jrs {
        #[arg(long, value_enum, default_value_t = Mode::Average)]
        mode: Mode,
        /// Monte-Carlo trials in addition to the exact simulation.
        #[arg(long, default_value_t = 0)]
        trials: usize,
    },
    /// Greedy ν-net of an ensemble, with error transfer when ε is given.
    Net {
        #[arg(long, value_enum, default_value_t = Order::Index)]
        order: Order,
    },
    /// Worst-case versus average-case gap on 2^n basis states.
    Gap {
        #[arg(long, default_value_t = 10)]
        n_bits: u32,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Comma-separated criterion ids; all when absent.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u32>>,
    },
}

/// Resolved configuration, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub ensemble: Option<String>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub nu: Option<f64>,
    pub seed: u64,
    pub tol: f64,
    pub format: Format,
    pub workers: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Apply per-command defaults and validate ranges.
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let c = cli.common;
        let default_eps = match cli.command {
            Command::Entropy | Command::Bounds { .. } | Command::Jrs { .. } => Some(0.1),
            Command::Gap { .. } => Some(0.5),
            Command::Locc { .. } | Command::Net { .. } | Command::Selftest { .. } => None,
        };
        let default_nu = matches!(cli.command, Command::Net { .. }).then_some(0.1);
        let cfg = Self {
            ensemble: c.ensemble.as_ref().map(|p| p.display().to_string()),
            epsilon: c.epsilon.or(default_eps),
            delta: c.delta,
            nu: c.nu.or(default_nu),
            seed: c.seed,
            tol: c.tol,
            format: c.format,
            workers: c.workers,
            out: c.out,
            command: cli.command,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let unit = |name: &str, v: Option<f64>| match v {
            Some(x) if !(0.0..=1.0).contains(&x) => {
                Err(CliError::Config(format!("--{name} must lie in [0,1], got {x}")))
            }
            _ => Ok(()),
        };
        unit("epsilon", self.epsilon)?;
        unit("nu", self.nu)?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Config(format!("--tol must be positive, got {}", self.tol)));
        }
        if let (Some(d), Some(e)) = (self.delta, self.epsilon) {
            if !(d > 0.0 && d < 1.0 - e * e) {
                return Err(CliError::Config(format!(
                    "--delta must lie in (0, 1-epsilon^2), got {d}"
                )));
            }
        }
        let needs_ensemble = matches!(
            self.command,
            Command::Entropy | Command::Bounds { .. } | Command::Jrs { .. } | Command::Net { .. }
        );
        if needs_ensemble && self.ensemble.is_none() {
            return Err(CliError::Config("--ensemble is required for this command".into()));
        }
        Ok(())
    }

    /// `ε`, which every caller of this method has defaulted.
    pub fn eps(&self) -> f64 {
        self.epsilon.expect("epsilon is defaulted for this command")
    }
}
