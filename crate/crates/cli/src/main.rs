//! `varham`: command-line access to the Hamiltonian evaluator, the Legendre
//! dual, the grid solvers and the diagnostics.
//!
//! Every command writes one JSON document `{"manifest": ..., "result": ...}`
//! to `--out` (stdout when absent). Exit codes: 0 success, 1 usage or I/O
//! error, 2 validation failure.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "varham", version, about = "Variational Hamiltonians of two-time-scale reaction networks")]
pub struct Cli {
    /// Seed for every random choice a command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for grid sweeps (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or validate model files.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Evaluate the Hamiltonian.
    #[command(subcommand)]
    Ham(HamCommand),
    /// Evaluate the Legendre dual.
    #[command(subcommand)]
    Lagrangian(LagrangianCommand),
    /// Action of a piecewise-linear path given as CSV `t,x_1,..,x_l`.
    Action(ActionArgs),
    /// Grid solvers.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Run all assumption checks on a model.
    Verify(VerifyArgs),
    /// Doubling-of-variables certificate for two grid functions.
    Doubling(DoublingArgs),
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Parse and check a model file.
    Validate {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the built-in Michaelis-Menten model.
    Mm {
        /// Rate constants k0,k1,k2,k3.
        #[arg(long, value_delimiter = ',', num_args = 1, default_value = "1,1,1,1")]
        k: Vec<f64>,
        /// Total enzyme count.
        #[arg(long = "M", default_value_t = 1)]
        m: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Where the Hamiltonian comes from: a reaction network or a control family.
#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Reaction network model (JSON).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Finite control family (JSON).
    #[arg(long)]
    pub control: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum HamCommand {
    /// H and grad_p H at one point.
    Eval {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        p: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// H and grad_p H at fixed p over the nodes of a grid.
    Table {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        p: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
        /// Table as CSV `x_1,..,x_l,p_1,..,p_l,H`.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone)]
pub struct GridArgs {
    /// Upper bound of the grid on every axis.
    #[arg(long, default_value_t = 4.0)]
    pub xmax: f64,
    /// Cells per axis.
    #[arg(long, default_value_t = 40)]
    pub cells: usize,
}

#[derive(Debug, Args, Clone)]
pub struct LegendreArgs {
    #[arg(long = "p-radius", default_value_t = 10.0)]
    pub p_radius: f64,
    #[arg(long = "legendre-tol", default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "legendre-max-iter", default_value_t = 5000)]
    pub max_iter: usize,
}

#[derive(Debug, Subcommand)]
pub enum LagrangianCommand {
    /// L(x, v).
    Eval {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        v: Vec<f64>,
        #[command(flatten)]
        legendre: LegendreArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ActionArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub path: PathBuf,
    #[command(flatten)]
    pub legendre: LegendreArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SolveCommand {
    /// f - lambda H(x, grad f) = h by semi-Lagrangian value iteration.
    Stationary(StationaryArgs),
    /// d_t u = H(x, grad u) by the Lax-Friedrichs scheme.
    Evolution(EvolutionArgs),
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub source: Source,
    /// Right-hand side as grid CSV `x_1,..,x_l,value`; the grid is read from it.
    #[arg(long)]
    pub h: Option<PathBuf>,
    /// Constant right-hand side on the grid given by --xmax/--cells.
    #[arg(long = "h-const", allow_hyphen_values = true, conflicts_with = "h")]
    pub h_const: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 5)]
    pub vgrid: usize,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100_000)]
    pub max_iter: usize,
    /// Solution CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolutionArgs {
    #[command(flatten)]
    pub source: Source,
    /// Initial datum as grid CSV.
    #[arg(long)]
    pub u0: PathBuf,
    #[arg(long = "T")]
    pub t_final: f64,
    #[arg(long, default_value_t = 0.5)]
    pub cfl: f64,
    /// Per-axis dissipation, overriding the estimate.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// Forced time step.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<f64>,
    /// Snapshot k is written to `<prefix>_<k>.csv`.
    #[arg(long = "csv-prefix")]
    pub csv_prefix: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub model: PathBuf,
    #[command(flatten)]
    pub grid: GridVerifyArgs,
    /// Random interior states for the irreducibility and convexity checks.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Extra states to check, e.g. `--at 0,1`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub at: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct GridVerifyArgs {
    #[arg(long, default_value_t = 10.0)]
    pub xmax: f64,
    #[arg(long, default_value_t = 40)]
    pub cells: usize,
}

#[derive(Debug, Args)]
pub struct DoublingArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub u: PathBuf,
    #[arg(long)]
    pub v: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01")]
    pub eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000,10000")]
    pub alpha: Vec<f64>,
    /// Containment function: log-quadratic or quadratic.
    #[arg(long, default_value = "log-quadratic")]
    pub kind: String,
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli, argv[1..].to_vec()) {
        Ok(commands::Outcome::Ok) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Invalid) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
