use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depthfill::{AdmmStart, Method, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "depthfill", version, about = "Depth image inpainting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fill the missing pixels of a depth image.
    Inpaint(InpaintArgs),
    /// Generate a random or stencil-based mask.
    Mask(MaskArgs),
    /// Compare a result against ground truth on the missing region.
    Eval(EvalArgs),
    /// Gradient histogram of an image, or a PSNR sweep over one weight.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lr,
    Lrtv,
    Lrl0,
    Lrl0psi,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lr => Method::Lr,
            MethodArg::Lrtv => Method::LrTv,
            MethodArg::Lrl0 => Method::LrL0,
            MethodArg::Lrl0psi => Method::LrL0Psi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StartArg {
    Warm,
    Zero,
}

/// Solver weights and stop rules shared by `inpaint` and the sweep.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 10.0)]
    pub lambda_r: f64,
    #[arg(long, default_value_t = 40.0)]
    pub lambda_tv: f64,
    #[arg(long, default_value_t = 30.0)]
    pub lambda_l0: f64,
    #[arg(long, default_value_t = 100.0)]
    pub lambda_l0psi: f64,
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 30)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Steps of the region fusion beta ramp.
    #[arg(long, default_value_t = 30)]
    pub ramp_steps: usize,
    /// Bregman passes per TV subproblem.
    #[arg(long, default_value_t = 10)]
    pub tv_inner_iters: usize,
    #[arg(long, value_enum, default_value_t = StartArg::Warm)]
    pub admm_start: StartArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn config(&self, method: Method) -> SolverConfig {
        SolverConfig {
            method,
            lambda_r: self.lambda_r,
            lambda_tv: self.lambda_tv,
            lambda_l0: self.lambda_l0,
            lambda_l0psi: self.lambda_l0psi,
            alpha: self.alpha,
            rho: self.rho,
            max_outer_iters: self.max_iters,
            rel_tol: self.tol,
            ramp_steps: self.ramp_steps,
            tv_inner_iters: self.tv_inner_iters,
            admm_start: match self.admm_start {
                StartArg::Warm => AdmmStart::LowRankWarm,
                StartArg::Zero => AdmmStart::Zero,
            },
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct InpaintArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Lrl0psi)]
    pub method: MethodArg,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    /// Output image; the format follows the extension (.pgm or .png).
    #[arg(long)]
    pub output: PathBuf,
    /// Ground truth; adds an evaluation to the manifest.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Manifest path, `<output>.manifest` by default.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskType {
    Random,
    Text,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[arg(long = "type", value_enum)]
    pub kind: MaskType,
    /// Missing probability per pixel for random masks.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Grayscale stencil for text masks; bright pixels become missing.
    #[arg(long)]
    pub stencil: Option<PathBuf>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Take the size from an existing image.
    #[arg(long)]
    pub like: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    /// Append a row to this CSV, writing the header if the file is new.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    LambdaR,
    LambdaTv,
    LambdaL0,
    LambdaL0psi,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Histogram CSV (magnitude,count); printed to stdout when absent.
    #[arg(long, conflicts_with = "sweep")]
    pub hist: Option<PathBuf>,
    /// Sweep one weight and report PSNR for each value.
    #[arg(long, value_enum, requires_all = ["mask", "gt"])]
    pub sweep: Option<SweepParam>,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 160.0)]
    pub to: f64,
    #[arg(long, default_value_t = 20.0)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Lrl0psi)]
    pub method: MethodArg,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Sweep CSV (lambda,psnr); printed to stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}
