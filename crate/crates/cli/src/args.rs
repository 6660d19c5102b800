use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvsteer::network::{db_to_squeezing, DEFAULT_SQUEEZING};
use cvsteer::steering::eta_grid;
use cvsteer::GhzConfig;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cvsteer",
    version,
    about = "Gaussian EPR steering in the continuous-variable tripartite GHZ state"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the distributed state and print its covariance matrix
    Build(BuildArgs),
    /// Analytic steering and monogamy values over a grid of channel efficiencies
    Sweep(SweepArgs),
    /// Simulated covariance reconstruction with trial statistics
    Tomo(TomoArgs),
    /// Run the invariant suite and report the first failure
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Squeezing parameter r of all three inputs
    #[arg(long = "r", conflicts_with = "squeezing_db")]
    pub r: Option<f64>,
    /// Squeezing in dB (noise reduction; sign ignored)
    #[arg(long, allow_negative_numbers = true)]
    pub squeezing_db: Option<f64>,
    /// Transmittance of the first beam splitter
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub t1: f64,
    /// Transmittance of the second beam splitter
    #[arg(long, default_value_t = 0.5)]
    pub t2: f64,
    /// Extra per-mode efficiencies "eA,eB,eC" applied after the channel
    #[arg(long, value_parser = parse_triple)]
    pub extra_efficiency: Option<[f64; 3]>,
}

impl StateArgs {
    pub fn config(&self, eta: f64) -> Result<GhzConfig, CliError> {
        let r = match (self.r, self.squeezing_db) {
            (Some(r), _) => r,
            (None, Some(db)) => db_to_squeezing(db),
            (None, None) => DEFAULT_SQUEEZING,
        };
        let mut cfg = GhzConfig::symmetric(r).with_eta(eta);
        cfg.t1 = self.t1;
        cfg.t2 = self.t2;
        if let Some(e) = self.extra_efficiency {
            cfg.extra_efficiency = e;
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; relative paths resolve against $CVSTEER_OUT_DIR when set.
    /// Defaults to stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Channel transmission efficiency on mode A
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Efficiency grid, "start:stop:step" or a comma-separated list
    #[arg(long, default_value = "0:1:0.05")]
    pub grid: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Quadrature samples per trial
    #[arg(long, default_value_t = cvsteer::tomography::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Number of independent reconstructions
    #[arg(long, default_value_t = cvsteer::tomography::DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reject trials whose smallest symplectic eigenvalue is below 1 - tol
    /// (default: max(1e-3, 8/sqrt(samples)))
    #[arg(long)]
    pub rejection_tol: Option<f64>,
    /// Also write the first trial's sample table as CSV to this path
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value = "0:1:0.01")]
    pub grid: String,
    /// Smallest symplectic eigenvalue a state must reach
    #[arg(long, default_value_t = 1.0)]
    pub min_nu: f64,
    #[arg(long, default_value_t = cvsteer::symplectic::PHYSICALITY_TOL)]
    pub phys_tol: f64,
    #[arg(long, default_value_t = cvsteer::steering::MONOGAMY_TOL)]
    pub mono_tol: f64,
    /// Bound on every one-to-one steering value
    #[arg(long, default_value_t = cvsteer::steering::STEERING_THRESHOLD)]
    pub pair_tol: f64,
    /// Bound on |G(i->jk) - G(jk->i)| at full transmission
    #[arg(long, default_value_t = 1e-9)]
    pub symmetry_tol: f64,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| "expected three comma-separated values".to_string())
}

/// `start:stop:step` or `a,b,c`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let usage = |msg: String| CliError::Usage(format!("grid {spec:?}: {msg}"));
    let grid = if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| usage(e.to_string())))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(usage("expected start:stop:step".into()));
        };
        eta_grid(start, stop, step).map_err(|e| usage(e.to_string()))?
    } else {
        spec.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| usage(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return Err(usage("empty grid".into()));
    }
    if let Some(bad) = grid.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(usage(format!("{bad} outside [0, 1]")));
    }
    Ok(grid)
}
