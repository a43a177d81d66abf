//! `cscs` command-line tool: CSV matrices in, JSON reports out.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 non-convergence
//! under `--strict`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use cscs::Method;

#[derive(Parser, Debug)]
#[command(name = "cscs", version, about = "Sparse Cholesky estimation of inverse covariance matrices")]
struct Cli {
    /// Worker threads for row-parallel fitting (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one estimator at a single penalty.
    Fit(FitArgs),
    /// Choose the penalty by BIC, cross-validation or the quantile rule.
    Tune(TuneArgs),
    /// Draw a random sparse model and sample data from it.
    Simulate(SimulateArgs),
    /// Score an estimated factor against a true precision matrix.
    Evaluate(EvaluateArgs),
    /// Run a seeded simulation experiment.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Cscs,
    SparseCholesky,
    SparseDag,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cscs => Method::Cscs,
            MethodArg::SparseCholesky => Method::SparseCholesky,
            MethodArg::SparseDag => Method::SparseDag,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// CSV file: n x p data, or p x p covariance with `--covariance`.
    #[arg(long, short)]
    input: PathBuf,
    /// Treat the input as a covariance matrix rather than data.
    #[arg(long)]
    covariance: bool,
    /// Sample size behind a covariance input (needed by BIC and the quantile rule).
    #[arg(long)]
    n: Option<usize>,
    /// Do not subtract column means.
    #[arg(long)]
    no_center: bool,
    /// Scale columns to unit variance.
    #[arg(long)]
    scale: bool,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Inner lasso sweep cap for sparse-cholesky.
    #[arg(long, default_value_t = 1000)]
    inner_max_iter: usize,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("penalty").required(true).args(["lambda", "quantile"])))]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "cscs")]
    method: MethodArg,
    /// Scalar penalty.
    #[arg(long)]
    lambda: Option<f64>,
    /// Per-row quantile penalty at level alpha.
    #[arg(long, value_name = "ALPHA")]
    quantile: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Estimated L (cscs) or T (baselines) as CSV.
    #[arg(long, short)]
    output: PathBuf,
    /// Diagonal D for the baselines [default: OUTPUT with a `.d.csv` suffix].
    #[arg(long)]
    d_output: Option<PathBuf>,
    /// JSON report path [default: stdout].
    #[arg(long)]
    report: Option<PathBuf>,
    /// Exit with status 3 if any row fails to converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CriterionArg {
    Bic,
    Cv,
    Quantile,
}

#[derive(Args, Debug)]
struct TuneArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "cscs")]
    method: MethodArg,
    #[arg(long, value_enum)]
    criterion: CriterionArg,
    /// Explicit comma-separated penalty grid.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid_count")]
    grid: Option<Vec<f64>>,
    /// Size of the default log-spaced grid.
    #[arg(long, default_value_t = 20)]
    grid_count: usize,
    /// Folds for cross-validation.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Level of the quantile rule.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Count only strict-lower nonzeros in BIC.
    #[arg(long)]
    bic_strict_lower: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    /// Fraction of strict-lower entries of T set to zero.
    #[arg(long, default_value_t = 0.98)]
    zero_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampled n x p data.
    #[arg(long, short)]
    output: PathBuf,
    /// True precision matrix.
    #[arg(long)]
    precision_output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Estimated lower-triangular L (p x p CSV).
    #[arg(long)]
    factor: PathBuf,
    /// True precision matrix (p x p CSV).
    #[arg(long)]
    truth: PathBuf,
    /// Held-out n x p data for the mean-zero Gaussian log-likelihood.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentName {
    Degeneracy,
    RocAuc,
    FrobeniusPath,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_enum)]
    name: ExperimentName,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Number of seeds (degeneracy).
    #[arg(long)]
    seeds: Option<usize>,
    /// Replications (roc-auc, frobenius-path).
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Penalty (degeneracy).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    zero_fraction: Option<f64>,
    #[arg(long)]
    grid_count: Option<usize>,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: could not start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Tune(a) => commands::tune(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Experiment(a) => commands::experiment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message().replace('\n', " "));
            ExitCode::from(e.code())
        }
    }
}
