use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use log::{error, info};

mod commands;
mod io;

#[derive(Parser, Debug)]
#[command(
    name = "czkit",
    about = "Kernels, filtrations and mixed-norm estimates for parabolic pseudo-differential operators"
)]
struct Cli {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the level table of the γ-adapted filtration.
    Partition(PartitionArgs),
    /// Run one kernel inequality sweep.
    Kernel(KernelArgs),
    /// Solve `u_t = A u − λu + f` on the configured grid.
    Solve(SolveArgs),
    /// Run one ensemble estimate.
    Estimate(EstimateArgs),
    /// Check the symbol conditions on a frequency lattice.
    VerifySymbol(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    /// Order as a decimal (`1.5`), fraction (`3/2`) or `pi`.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: String,
    /// Inclusive level range `A..B`.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "locate")]
    pub levels: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Print the division/merger steps instead of the level table.
    #[arg(long)]
    pub trace: bool,
    /// Point `t,x1[,x2…]` whose containing cube is printed.
    #[arg(long, allow_hyphen_values = true, requires = "level")]
    pub locate: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub level: Option<i64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelCheck {
    L1,
    Moment,
    Hormander,
    Assumption1,
    Opnorm,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub check: KernelCheck,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Forcing description, or `{"file": "f.bin"}` naming a raw grid file.
    #[arg(long = "f")]
    pub forcing: PathBuf,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateCheck {
    Apriori,
    Resolvent,
    Gl2,
    Weak11,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub check: EstimateCheck,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn version() -> String {
    format!("{} (config schema {})", env!("CARGO_PKG_VERSION"), czkit::CONFIG_SCHEMA_VERSION)
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Partition(a) => commands::partition(&a),
        Command::Kernel(a) => commands::kernel(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::VerifySymbol(a) => commands::verify_symbol(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let matches = Cli::command().version(version()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            info!("one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(2)
        }
    }
}
