//! `bayeslm`: Bayesian linear regression on summary statistics.
//!
//! Subcommands tie the pipeline together: `simulate` writes synthetic
//! regression data, `ingest` streams delimited files into persisted
//! sufficient statistics (optionally updating previous statistics),
//! `sample` runs the Gibbs sampler over a prior configuration, `summarize`
//! reduces draws files to posterior summaries and plot data, and `bench`
//! times ingestion and sampling.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error,
//! 3 numerical error. Every failure prints a one-line
//! `error: <class>: <reason>` to stderr.

mod commands;
mod inputs;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use bayeslm::error::ErrorClass;

#[derive(Parser)]
#[command(
    name = "bayeslm",
    version,
    about = "Bayesian linear regression on mergeable sufficient statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic regression data with correlated predictors.
    Simulate(SimulateArgs),
    /// Stream delimited files into persisted sufficient statistics.
    Ingest(IngestArgs),
    /// Run the Gibbs sampler over persisted statistics.
    Sample(SampleArgs),
    /// Summarize a draws file: means, SDs, quantiles, credible intervals.
    Summarize(SummarizeArgs),
    /// Time ingestion and sampling on simulated data.
    Bench(BenchArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    /// Number of rows to generate.
    #[arg(long)]
    pub n: u64,
    /// Number of predictor columns.
    #[arg(long)]
    pub k: usize,
    /// Common predictor correlation; must lie in (-1/(k-1), 1).
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
    /// Error variance.
    #[arg(long = "sigma-sq", default_value_t = 1.0)]
    pub sigma_sq: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rows generated per write batch.
    #[arg(long = "chunk-rows", default_value_t = 100_000)]
    pub chunk_rows: usize,
    /// Output data file (predictors in columns 1..k, response in k+1).
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the true parameters; defaults to `<out>.truth`.
    #[arg(long = "truth-out")]
    pub truth_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct IngestArgs {
    /// Input file; repeat for multiple files folded in order.
    #[arg(long = "input", required = true)]
    pub input: Vec<PathBuf>,
    /// 1-based predictor columns, e.g. "1-10" or "2,3,5".
    #[arg(long = "predictor-cols")]
    pub predictor_cols: String,
    /// 1-based response column.
    #[arg(long = "response-col")]
    pub response_col: usize,
    /// Rows in the first chunk of each file.
    #[arg(long = "first-rows", default_value_t = 100_000)]
    pub first_rows: usize,
    /// Rows in each subsequent chunk.
    #[arg(long = "next-rows", default_value_t = 100_000)]
    pub next_rows: usize,
    /// Leading rows to skip per file (headers etc.).
    #[arg(long, default_value_t = 0)]
    pub skip: u64,
    /// Field delimiter (single character).
    #[arg(long, default_value = ",")]
    pub delimiter: String,
    /// Do not prepend the constant-1 intercept column.
    #[arg(long = "no-intercept")]
    pub no_intercept: bool,
    /// Previously saved statistics to update with the new data.
    #[arg(long)]
    pub update: Option<PathBuf>,
    /// Where to save the statistics.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct SampleArgs {
    /// Persisted statistics file from `ingest`.
    #[arg(long)]
    pub stats: PathBuf,
    /// Prior for the coefficients.
    #[arg(long = "beta-prior", value_parser = ["flat", "mvnorm-known", "mvnorm-unknown"])]
    pub beta_prior: String,
    /// Prior for the error variance.
    #[arg(long = "sigmasq-prior", value_parser = ["inverse-gamma", "jeffreys"])]
    pub sigmasq_prior: String,
    /// Prior mean for beta: "zeros", "ones", or a file of p values.
    #[arg(long = "mean-mu")]
    pub mean_mu: Option<String>,
    /// Prior covariance C: "identity" or a file of p*p values.
    #[arg(long = "cov-c")]
    pub cov_c: Option<String>,
    /// Prior precision C^-1; preferred over --cov-c when both are given.
    #[arg(long = "prec-cinv")]
    pub prec_cinv: Option<String>,
    /// Hyperprior mean for mu (mvnorm-unknown): "zeros", "ones", or a file.
    #[arg(long)]
    pub eta: Option<String>,
    /// Hyperprior precision D^-1 (mvnorm-unknown): "identity" or a file.
    #[arg(long)]
    pub dinv: Option<String>,
    /// Wishart degrees of freedom (mvnorm-unknown); defaults to p.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Wishart inverse scale V^-1 (mvnorm-unknown): "identity" or a file.
    #[arg(long)]
    pub vinv: Option<String>,
    /// Starting value for mu (mvnorm-unknown): "zeros", "ones", or a file.
    #[arg(long = "mu-init")]
    pub mu_init: Option<String>,
    /// Starting value for C^-1 (mvnorm-unknown): "identity" or a file.
    #[arg(long = "cinv-init")]
    pub cinv_init: Option<String>,
    /// Inverse-gamma shape a.
    #[arg(long = "ig-a", default_value_t = 1.0)]
    pub ig_a: f64,
    /// Inverse-gamma scale b (the prior rate is 1/b).
    #[arg(long = "ig-b", default_value_t = 1.0)]
    pub ig_b: f64,
    /// Starting value for sigma-squared.
    #[arg(long = "sigmasq-init", default_value_t = 1.0)]
    pub sigmasq_init: f64,
    /// Number of posterior draws to produce (burn-in included).
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Remove the intercept term before sampling.
    #[arg(long = "zero-intercept")]
    pub zero_intercept: bool,
    /// Independent chains; chain i uses random stream i of the seed.
    #[arg(long, default_value_t = 1)]
    pub chains: u64,
    /// Prefix for output files: `<prefix>draws.csv`, or
    /// `<prefix>chain<i>_draws.csv` with several chains.
    #[arg(long = "out-prefix")]
    pub out_prefix: String,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct SummarizeArgs {
    /// Draws file produced by `sample`.
    #[arg(long)]
    pub draws: PathBuf,
    /// Leading draws to discard.
    #[arg(long = "burn-in", default_value_t = 0)]
    pub burn_in: usize,
    /// Quantile probabilities.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.025, 0.25, 0.5, 0.75, 0.975])]
    pub probs: Vec<f64>,
    /// Credible-interval level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Directory for per-parameter history/density plot data.
    #[arg(long = "plot-data")]
    pub plot_data: Option<PathBuf>,
    /// Also write the summary table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct BenchArgs {
    /// Rows of simulated data.
    #[arg(long)]
    pub n: u64,
    /// Predictors.
    #[arg(long)]
    pub k: usize,
    /// Posterior draws to time.
    #[arg(long, default_value_t = 11_000)]
    pub samples: usize,
    #[arg(long = "beta-prior", value_parser = ["flat", "mvnorm-known", "mvnorm-unknown"], default_value = "flat")]
    pub beta_prior: String,
    #[arg(long = "sigmasq-prior", value_parser = ["inverse-gamma", "jeffreys"], default_value = "inverse-gamma")]
    pub sigmasq_prior: String,
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// CLI failure with its exit class.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl From<bayeslm::Error> for CliError {
    fn from(err: bayeslm::Error) -> Self {
        match err.class() {
            ErrorClass::Usage => CliError::Usage(err.to_string()),
            ErrorClass::Data => CliError::Data(err.to_string()),
            ErrorClass::Numeric => CliError::Numeric(err.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn class_tag(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Numeric(_) => "numeric",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

/// Die quietly on SIGPIPE like other line-oriented tools, instead of
/// panicking when stdout is closed by `head` and friends.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap's rendering starts with a one-line `error: ...` reason
            // and includes the usage text.
            eprint!("{err}");
            std::process::exit(1);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Ingest(args) => commands::ingest(&args),
        Command::Sample(args) => commands::sample(&args),
        Command::Summarize(args) => commands::summarize(&args),
        Command::Bench(args) => commands::bench(&args),
    };
    if let Err(err) = result {
        eprintln!("error: {}: {}", err.class_tag(), err.message());
        std::process::exit(err.exit_code());
    }
}
