use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use irobd_core::instances::{DeltaKind, Remark1Profile, Remark1Shape, SpeedProfile};

use crate::family::{Family, FamilyParams};

/// Experiments for online optimization with delayed feedback and
/// multi-step switching costs.
#[derive(Debug, Parser)]
#[command(name = "irobd", version)]
pub struct Cli {
    /// JSON config file with solver settings and a thread count.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Gradient-norm tolerance of the inner solvers [default: 1e-10].
    #[arg(long, global = true)]
    pub grad_tol: Option<f64>,

    /// Iteration budget of the inner solvers [default: 10000].
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,

    /// Worker threads for parallel sections [default: all cores].
    #[arg(long, global = true, env = "IROBD_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Run an online algorithm on an instance.
    Run(RunArgs),
    /// Solve an instance offline.
    Oracle(OracleArgs),
    /// Rewrite a control system as a delayed OCO instance.
    Reduce(ReduceArgs),
    /// Evaluate the closed-form ratio bounds.
    Bounds(BoundsArgs),
    /// Run a grid of instances and algorithms into a CSV table.
    Sweep(SweepArgs),
    /// Check the runtime inequalities on an instance, a control system or a sweep table.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Linear,
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    RandomWalk,
    Escalating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpeedArg {
    Hover,
    Constant,
    Sine,
    RandomWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeltaArg {
    Linear,
    Sine,
    Drone,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lower hitting curvature.
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Upper hitting curvature (random) [default: m].
    #[arg(long)]
    pub l: Option<f64>,
    /// Growth factor (thm3) or Σ‖C_i‖ (random with --delta linear).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Delay [default: 3 for thm3, 0 otherwise].
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 50)]
    pub horizon: usize,
    /// Excess Lipschitz constant L of the remark1 map.
    #[arg(long, default_value_t = 0.5)]
    pub lipschitz: f64,
    #[arg(long, value_enum, default_value = "linear")]
    pub shape: ShapeArg,
    #[arg(long, value_enum, default_value = "random-walk")]
    pub profile: ProfileArg,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.01)]
    pub gamma: f64,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.01)]
    pub c2: f64,
    #[arg(long, value_enum, default_value = "hover")]
    pub speed: SpeedArg,
    #[arg(long, default_value_t = 1.0)]
    pub level: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 10.0)]
    pub period: f64,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub delta: DeltaArg,
    /// Linear coefficient of the sine map (random with --delta sine).
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gain: f64,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the reference trajectory of a remark2 instance here.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

impl GenArgs {
    pub fn params(&self) -> FamilyParams {
        let defaults = FamilyParams::default();
        FamilyParams {
            family: self.family,
            seed: self.seed,
            m: self.m,
            l: self.l,
            alpha: self.alpha.unwrap_or(defaults.alpha),
            k: self.k,
            horizon: self.horizon,
            lipschitz: self.lipschitz,
            shape: match self.shape {
                ShapeArg::Linear => Remark1Shape::Linear,
                ShapeArg::Sine => Remark1Shape::Sine,
            },
            profile: match self.profile {
                ProfileArg::RandomWalk => Remark1Profile::RandomWalk,
                ProfileArg::Escalating => Remark1Profile::Escalating,
            },
            eps: self.eps,
            gamma: self.gamma,
            n: self.n,
            c1: self.c1,
            c2: self.c2,
            speed: match self.speed {
                SpeedArg::Hover => SpeedProfile::Hover,
                SpeedArg::Constant => SpeedProfile::Constant { level: self.level },
                SpeedArg::Sine => SpeedProfile::Sine {
                    amplitude: self.amplitude,
                    period: self.period,
                },
                SpeedArg::RandomWalk => SpeedProfile::RandomWalk { step: self.step },
            },
            d: self.d,
            p: self.p,
            delta: match self.delta {
                DeltaArg::Linear => DeltaKind::Linear {
                    alpha: self.alpha.unwrap_or(0.9),
                },
                DeltaArg::Sine => DeltaKind::Sine { a: self.a, gain: self.gain },
                DeltaArg::Drone => DeltaKind::Drone { c1: self.c1, c2: self.c2 },
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Robd,
    Irobd,
    M2m,
    Stay,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Robd => "robd",
            Algorithm::Irobd => "irobd",
            Algorithm::M2m => "m2m",
            Algorithm::Stay => "stay",
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub alg: Algorithm,
    #[arg(long)]
    pub instance: PathBuf,
    /// Switching weight λ (λ1 for ROBD).
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// ROBD's extra pull toward the minimizer.
    #[arg(long, default_value_t = 0.0)]
    pub lambda2: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    /// Convex for linear maps, grid DP for scalar maps with p ≤ 2, multistart otherwise.
    Auto,
    Convex,
    Dp,
    Multistart,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: OracleArg,
    /// DP grid points.
    #[arg(long, default_value_t = 2001)]
    pub cells: usize,
    /// DP grid lower end [default: derived from the minimizers].
    #[arg(long, requires = "hi")]
    pub lo: Option<f64>,
    /// DP grid upper end.
    #[arg(long, requires = "lo")]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemKind {
    Linear,
    Nonlinear,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    pub kind: SystemKind,
    /// Directory receiving instance.json and recovery.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Cor1,
    Cor1Opt,
    Thm1,
    Thm2,
    Thm3,
    Prior,
    All,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub which: Which,
    /// Lower hitting curvature.
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Upper hitting curvature.
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
    /// Lipschitz constant L of the switching map (excess over 1 for cor1).
    #[arg(long, default_value_t = 0.5)]
    pub lip: f64,
    /// Switching weight [default: the cor1 optimum].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Σ‖C_i‖ (thm2, prior) or the growth factor (thm3).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep specification (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output CSV [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group = clap::ArgGroup::new("target").required(true).multiple(false))]
pub struct VerifyArgs {
    #[arg(long, group = "target")]
    pub instance: Option<PathBuf>,
    /// Control system file; checks cost equivalence of the reduction.
    #[arg(long, group = "target")]
    pub system: Option<PathBuf>,
    /// Sweep CSV; checks every bound column.
    #[arg(long, group = "target")]
    pub sweep: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "linear")]
    pub kind: SystemKind,
    /// Switching weight used for the algorithm runs.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Slack tolerance of every inequality [default: 1e-8 per step, 1e-6 for sums].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random decision sequences per control system.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}
