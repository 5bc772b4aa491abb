use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Experiments for first-kind integral equations with sampled Tikhonov
/// regularization.
#[derive(Debug, Parser)]
#[command(name = "fredholm", version, about)]
pub struct Cli {
    /// TOML file with run parameters; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Base seed for synthetic noise.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Monte Carlo trial count (rates, tails).
    #[arg(long, global = true)]
    pub trials: Option<usize>,

    /// Output directory for CSV and JSON files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads; defaults to FREDHOLM_THREADS, then to all cores.
    #[arg(long, global = true, env = "FREDHOLM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the regularized problem at one parameter value.
    Solve(SolveArgs),
    /// Run the adaptive parameter iteration and write its trace.
    SelectAlpha(SelectArgs),
    /// Monte Carlo error expectations and the fitted log-log rate.
    Rates(RatesArgs),
    /// Error distribution, histogram and normal QQ diagnostics.
    Tails(TailsArgs),
    /// Spectrum of the midpoint-quadrature operator and its decay fit.
    Singvals(SingvalsArgs),
}

/// Kernel, mesh and observation overrides shared by solve and select-alpha.
#[derive(Debug, Default, Args)]
pub struct ProblemArgs {
    /// green or exponential.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Number of mesh nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Mesh size; ignored when --nodes is given.
    #[arg(long, allow_negative_numbers = true)]
    pub mesh_size: Option<f64>,
    /// Synthetic ground truth: quintic, step or zero.
    #[arg(long)]
    pub truth: Option<String>,
    /// Number of equispaced samples for synthetic data.
    #[arg(long)]
    pub n: Option<usize>,
    /// Relative noise level; sigma = delta * sup |K x|.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Absolute noise standard deviation; overrides --delta.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// CSV file with columns s,w instead of synthetic data.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct RuleArgs {
    /// fixed, a-priori or adaptive.
    #[arg(long)]
    pub alpha_rule: Option<String>,
    /// Parameter for the fixed rule.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Multiplier in the a priori and adaptive rules.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Starting value of the adaptive iteration.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha0: Option<f64>,
    /// Relative stopping tolerance of the adaptive iteration.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Iteration cap of the adaptive iteration.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub rule: RuleArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub mesh_size: Option<f64>,
    #[arg(long)]
    pub truth: Option<String>,
    /// empirical, wstar or l2.
    #[arg(long)]
    pub measure: Option<String>,
    /// Comma-separated sample counts.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    /// Comma-separated relative noise levels.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub delta_grid: Option<Vec<f64>>,
    /// Comma-separated absolute noise levels; overrides --delta-grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub sigma_grid: Option<Vec<f64>>,
    /// Sine terms kept in the weak norm.
    #[arg(long)]
    pub truncation: Option<usize>,
    #[command(flatten)]
    pub rule: RuleArgs,
}

#[derive(Debug, Args)]
pub struct TailsArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub mesh_size: Option<f64>,
    #[arg(long)]
    pub truth: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Fixed parameter; the a priori rule is used when absent.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SingvalsArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    /// Midpoint quadrature points.
    #[arg(long)]
    pub points: Option<usize>,
    /// First index of the fit window (1-based).
    #[arg(long)]
    pub j0: Option<usize>,
    /// Last index of the fit window (1-based, inclusive).
    #[arg(long)]
    pub j1: Option<usize>,
}
