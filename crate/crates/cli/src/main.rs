//! `walklab`: distribution tables, series partial sums, Monte Carlo ensembles
//! and identity checks for the Bernoulli random walk.

mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "walklab",
    version,
    about = "Bernoulli random walks: exact tables, series and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability distribution of the walk after n steps.
    Dist(DistArgs),
    /// Terms and partial sums of the gamma or zeta series.
    Series(SeriesArgs),
    /// Monte Carlo ensemble of walks.
    Simulate(SimulateArgs),
    /// Run identity, asymptotic and Monte Carlo checks.
    Verify(VerifyArgs),
}

/// Step probability given directly or through `4p(1-p) = x^2`.
#[derive(Debug, Args)]
pub struct StepArgs {
    /// Forward step probability: `a/b` or an integer for exact arithmetic, a decimal for floating point.
    #[arg(long, conflicts_with = "x", allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Coupling x in [-1, 1], mapped to p by `4p(1-p) = x^2`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Root of `4p(1-p) = x^2` to use with --x.
    #[arg(long, value_enum, default_value_t = BranchArg::Plus, requires = "x")]
    pub branch: BranchArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// Step index.
    #[arg(long, required_unless_present_any = ["table1", "table2"])]
    pub n: Option<u32>,
    #[command(flatten)]
    pub step: StepArgs,
    /// `none`, a barrier position `a >= 1`, or `delayed` (origin, after the first step).
    #[arg(long, default_value = "none")]
    pub barrier: String,
    /// Symmetric walk rows 0..=max-n with the factor 2^-n pulled out.
    #[arg(long, conflicts_with_all = ["n", "table2", "p", "x"])]
    pub table1: bool,
    /// Symmetric walk with a delayed barrier, rows 1..=max-n.
    #[arg(long, conflicts_with_all = ["n", "p", "x"])]
    pub table2: bool,
    #[arg(long, default_value_t = 6)]
    pub max_n: u32,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KindArg {
    Gamma,
    Zeta,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Coupling x in [-1, 1]: `a/b` or an integer is exact, a decimal is floating point.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Largest term index.
    #[arg(long)]
    pub max_n: u32,
    /// Add the large-n approximation of the closed form at x = 1.
    #[arg(long)]
    pub with_stirling: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SimBarrierArg {
    None,
    Delayed,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub step: StepArgs,
    /// Steps per walk (even).
    #[arg(long)]
    pub steps: u32,
    #[arg(long)]
    pub walks: u64,
    #[arg(long, env = "WALKLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SimBarrierArg::None)]
    pub barrier: SimBarrierArg,
    #[arg(long, default_value_t = 16_384)]
    pub chunk_size: u64,
    /// Worker threads; the report does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SuiteArg {
    All,
    Exact,
    Asymptotic,
    Stochastic,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    /// Largest step index (exact suite) or return index (asymptotic suite).
    #[arg(long, default_value_t = 40)]
    pub max_n: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub walks: u64,
    #[arg(long, env = "WALKLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Largest tolerated |z| of a Monte Carlo statistic.
    #[arg(long, default_value_t = 4.0)]
    pub z_threshold: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, format) = match &cli.command {
        Command::Dist(a) => (commands::dist(a), a.format),
        Command::Series(a) => (commands::series(a), a.format),
        Command::Simulate(a) => (commands::simulate(a), a.format),
        Command::Verify(a) => (commands::verify(a), a.format),
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("walklab: error: {e}");
            return ExitCode::from(2);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = report.write(format, &mut out).and_then(|_| out.flush()) {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("walklab: error: {e}");
            return ExitCode::from(2);
        }
    }
    let failed = report.checks.iter().flatten().filter(|c| !c.passed).count();
    if failed > 0 {
        eprintln!("walklab: {failed} check(s) failed");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
