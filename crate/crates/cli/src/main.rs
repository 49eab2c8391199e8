//! `covbreak`: tests for breaks in the covariance structure of multivariate
//! time series, binary segmentation, simulation and Monte Carlo studies.

mod commands;
mod csvio;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covbreak::limit::Statistic;

use crate::output::Format;

/// Fixed seed used whenever `--seed` is absent.
pub const DEFAULT_SEED: u64 = 20_100_413;

#[derive(Parser)]
#[command(name = "covbreak", version, about = "Detect breaks in the covariance structure of multivariate time series")]
struct Cli {
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct InputArgs {
    /// Delimited numeric file, one observation per row.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Args, Clone)]
pub struct CsvArgs {
    /// The first row holds column names.
    #[arg(long)]
    pub header: bool,
    /// The first column holds row labels (e.g. dates).
    #[arg(long)]
    pub labels: bool,
    /// Field delimiter: one character, or `tab`.
    #[arg(long, default_value = ",", value_parser = csvio::parse_delimiter)]
    pub delimiter: u8,
}

#[derive(Args, Clone)]
pub struct TestArgs {
    /// Which statistic to use.
    #[arg(long, default_value = "omega", value_parser = parse_statistic)]
    pub stat: Statistic,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Skip demeaning of the observations.
    #[arg(long)]
    pub no_center: bool,
    /// Apply |x|^delta componentwise before testing.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Bartlett window: `auto` (floor(log10 n)) or a fixed lag.
    #[arg(long, default_value = "auto")]
    pub bartlett: String,
    /// Ridge added to the long-run covariance, relative to its mean eigenvalue.
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Seed of the Monte Carlo law of the lambda statistic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo replications for the lambda law.
    #[arg(long, default_value_t = covbreak::limit::DEFAULT_REPLICATIONS)]
    pub lambda_reps: usize,
    /// Grid points per simulated bridge for the lambda law.
    #[arg(long, default_value_t = covbreak::limit::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Test a panel for a single covariance break.
    Test {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        test: TestArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate multiple breaks by binary segmentation.
    Segment {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        test: TestArgs,
        /// Shortest segment that is still split.
        #[arg(long, default_value_t = covbreak::segment::DEFAULT_MIN_LEN)]
        min_len: usize,
        #[arg(long, default_value_t = covbreak::segment::DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        /// Comma-separated level per round; the last one covers deeper rounds.
        #[arg(long, value_delimiter = ',')]
        round_levels: Vec<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full segmentation tree as JSON.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Simulate a model given as TOML.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// Model after the break, if any.
        #[arg(long)]
        post: Option<PathBuf>,
        /// Relative break location used with `--post`.
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = covbreak::generators::DEFAULT_BURN_IN)]
        burnin: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a header row.
        #[arg(long)]
        header: bool,
        #[arg(long, default_value = ",", value_parser = csvio::parse_delimiter)]
        delimiter: u8,
        /// Simulate even if the stationarity check fails.
        #[arg(long)]
        allow_nonstationary: bool,
    },
    /// Quantiles of the limit laws.
    Quantile {
        #[arg(long, default_value = "omega", value_parser = parse_statistic)]
        stat: Statistic,
        /// Dimension of the vech vectors; use `--d` for the observation dimension.
        #[arg(long, conflicts_with = "d")]
        vdim: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated probabilities.
        #[arg(long, value_delimiter = ',', default_value = "0.9,0.95,0.99")]
        prob: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = covbreak::limit::DEFAULT_REPLICATIONS)]
        lambda_reps: usize,
        #[arg(long, default_value_t = covbreak::limit::DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a Monte Carlo study described in TOML.
    Study {
        #[arg(long)]
        design: PathBuf,
        /// Override the number of replications.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Centered log-returns of a price panel.
    Logreturns {
        #[arg(long)]
        prices: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rolling (co)volatilities in long format `j,k,l,value`.
    Rollvol {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 100)]
        window: usize,
        /// `all`, or 1-based pairs `k,l`; repeat the flag for several pairs.
        #[arg(long, default_values = ["all"])]
        pairs: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the reference quantile tables of both limit laws.
    Tables {
        /// 1 (omega), 2 (lambda) or all.
        #[arg(long, default_value = "all")]
        table: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = covbreak::limit::DEFAULT_REPLICATIONS)]
        lambda_reps: usize,
        #[arg(long, default_value_t = covbreak::limit::DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn parse_statistic(s: &str) -> Result<Statistic, String> {
    s.parse().map_err(|e: covbreak::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let exec = if cli.sequential {
        covbreak::Exec::Sequential
    } else {
        covbreak::Exec::Parallel
    };
    match commands::run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
