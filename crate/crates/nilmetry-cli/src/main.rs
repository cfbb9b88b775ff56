//! Reproducible experiment driver for the nilmetry toolkit.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
//! mathematical claim under verification was violated (so CI can tell
//! infrastructure failures apart from falsified bounds).

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Driver error; everything surfacing here exits with code 1.
#[derive(Debug)]
pub struct CliError(pub String);

impl CliError {
    pub fn usage(msg: String) -> Self {
        CliError(msg)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<nilmetry::Error> for CliError {
    fn from(e: nilmetry::Error) -> Self {
        CliError(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "nilmetry",
    version,
    about = "Experiments on graded nilpotent Lie groups: quasiisometry envelopes, cone convergence, vertical foliations, Lipschitz lifts, ball-box and triangle-constant estimation",
    after_help = "Every experiment takes --config FILE (TOML); command-line flags override config keys. A seed is mandatory. NILMETRY_THREADS caps worker parallelism."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit large-scale Lipschitz envelopes of a map and verify claimed
    /// quasiisometry constants
    Qi(QiArgs),
    /// Sup-distance of dilation conjugates over a grid as the scale drops
    Cone(ConeArgs),
    /// Vertical-line images: projection diameter, best vertical base,
    /// truncated Hausdorff estimates
    Foliation(FoliationArgs),
    /// Lift a planar map and tabulate h0, determinant and curl diagnostics
    Lift(LiftArgs),
    /// Empirical ball-box constant from distance upper bounds
    Ballbox(BallboxArgs),
    /// Sample the generalized triangle constant of the homogeneous gauge
    Triangle(TriangleArgs),
    /// List built-in groups, maps, and metrics
    List,
}

#[derive(Args)]
pub struct CommonArgs {
    /// TOML config file; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (mandatory, here or in the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout summary is always printed)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct QiArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Group name (`heisenberg3`, `abelian(n)`, …) or `@algebra.toml`
    #[arg(long)]
    group: Option<String>,
    /// Map expression, e.g. `shear(abs)` or `Flambda:2`
    #[arg(long)]
    map: Option<String>,
    /// Metric: `dh` or `koranyi`
    #[arg(long)]
    metric: Option<String>,
    /// Number of sampled pairs
    #[arg(long)]
    samples: Option<usize>,
    /// Triples for the triangle constant when `--claim theorem` is used
    #[arg(long)]
    triples: Option<usize>,
    /// Box radius of the sampling domain
    #[arg(long)]
    radius: Option<f64>,
    /// Pair mode: `uniform`, `unit`, or `near`
    #[arg(long)]
    pairs: Option<String>,
    /// Claimed constants: `theorem` (shears only) or `L,A`
    #[arg(long)]
    claim: Option<String>,
}

#[derive(Args)]
pub struct ConeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    group: Option<String>,
    /// Map expression; a pure shear gets the closed-form deviation bound
    #[arg(long)]
    map: Option<String>,
    /// Comma-separated decreasing scales, e.g. `1,0.1,0.01`
    #[arg(long)]
    scales: Option<String>,
    /// Radius of the Carnot box the grid covers
    #[arg(long)]
    radius: Option<f64>,
    /// Total grid point budget
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    metric: Option<String>,
}

#[derive(Args)]
pub struct FoliationArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Map expression on heisenberg3, e.g. `Flambda:2`
    #[arg(long)]
    map: Option<String>,
    /// Comma-separated base points, e.g. `4+4i,8+8i`
    #[arg(long)]
    z: Option<String>,
    /// Bases n+in for comma-separated n values (alternative to --z)
    #[arg(long)]
    n_list: Option<String>,
    /// Vertical range |t| ≤ t_max
    #[arg(long)]
    t_max: Option<f64>,
    /// Samples per vertical line
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
pub struct LiftArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Planar map: `id`, `f_lambda:<λ>`, `paper_example`, or `@grid.txt`
    #[arg(long)]
    planar: Option<String>,
    /// Probe grid radius
    #[arg(long)]
    radius: Option<f64>,
    /// Probes per axis
    #[arg(long)]
    grid: Option<usize>,
    /// Curl tolerance; exceeding it exits with code 2
    #[arg(long)]
    curl_tol: Option<f64>,
    /// Finite-difference step for the determinant column
    #[arg(long)]
    fd_step: Option<f64>,
}

#[derive(Args)]
pub struct BallboxArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    /// Optimization budget per sampled point
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
pub struct TriangleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(threads) = std::env::var("NILMETRY_THREADS") {
        match threads.trim().parse::<usize>() {
            Ok(n) if n >= 1 => nilmetry::exec::configure_thread_cap(n),
            _ => {
                eprintln!("error: NILMETRY_THREADS must be a positive integer, got `{threads}`");
                return ExitCode::from(1);
            }
        }
    }
    let outcome = match cli.cmd {
        Cmd::Qi(args) => commands::run_qi(args),
        Cmd::Cone(args) => commands::run_cone(args),
        Cmd::Foliation(args) => commands::run_foliation(args),
        Cmd::Lift(args) => commands::run_lift(args),
        Cmd::Ballbox(args) => commands::run_ballbox(args),
        Cmd::Triangle(args) => commands::run_triangle(args),
        Cmd::List => commands::run_list(),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
