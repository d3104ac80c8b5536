use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbb_core::splitting::StopRule;

#[derive(Debug, Parser)]
#[command(name = "fbb", version, about = "Three-operator splitting solvers and convergence certification")]
pub struct Cli {
    /// Seed for every random choice (generation, sampled checks); echoed in outputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a problem file.
    Gen(GenArgs),
    /// Run one method and print a summary line.
    Solve(SolveArgs),
    /// Run several methods on one problem and tabulate their cost.
    Compare(CompareArgs),
    /// Check the Lyapunov descent inequality along an FBB run.
    Certify(CertifyArgs),
    /// Scan FBB over a grid of stepsizes.
    Frontier(FrontierArgs),
    /// Render residual curves of a trace CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    BoxLasso,
    AffineFeasibility,
    MonotoneAffine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopRuleArg {
    Safeguarded,
    PaperRelative,
    AbsoluteResidual,
}

impl From<StopRuleArg> for StopRule {
    fn from(v: StopRuleArg) -> Self {
        match v {
            StopRuleArg::Safeguarded => StopRule::Safeguarded,
            StopRuleArg::PaperRelative => StopRule::PaperRelative,
            StopRuleArg::AbsoluteResidual => StopRule::AbsoluteResidual,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: ProblemKind,
    #[arg(long = "dim", short = 'd')]
    pub dim: usize,
    /// Output problem file.
    #[arg(long)]
    pub out: PathBuf,
    /// Fraction of nonzero signal entries (box-lasso).
    #[arg(long, default_value_t = 0.4)]
    pub density: f64,
    /// Weight of the skew part of the affine operator (monotone-affine).
    #[arg(long, default_value_t = 0.5)]
    pub skew: f64,
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Stepsize; defaults to 0.9 of the method's bound.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-20)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long = "stop-rule", value_enum, default_value_t = StopRuleArg::Safeguarded)]
    pub stop_rule: StopRuleArg,
    /// Permit stepsizes at or beyond the proven bound.
    #[arg(long = "allow-unsafe-gamma")]
    pub allow_unsafe_gamma: bool,
    /// Record wall-clock times (otherwise written as 0 so outputs are reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = "fbb")]
    pub method: String,
    /// Per-iteration CSV trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Append the final iterate to the summary line.
    #[arg(long = "print-x")]
    pub print_x: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated method names.
    #[arg(long = "method", value_delimiter = ',', default_value = "fbb,dy,dr,rfb,frb")]
    pub methods: Vec<String>,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Relative tolerance of the descent check.
    #[arg(long = "descent-tol", default_value_t = fbb_core::certify::DESCENT_TOL)]
    pub descent_tol: f64,
    /// Per-step certification CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Absolute stepsizes, comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "fractions")]
    pub gammas: Option<Vec<f64>>,
    /// Stepsizes as multiples of the bound 2β/5, comma-separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.25,0.5,0.75,0.9,1,1.25,1.5,2,2.5,3,4,5"
    )]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 1e-20)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long = "stop-rule", value_enum, default_value_t = StopRuleArg::Safeguarded)]
    pub stop_rule: StopRuleArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Trace CSV written by `solve --trace`.
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
