//! `corrmax`: maximize, bound, and certify the coincidence rate of local
//! measurements on bipartite quantum states.
//!
//! Exit codes: 0 success, 2 validation error (unreadable or malformed
//! inputs, dimension mismatches, bad parameters), 3 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod reports;
mod run;

use run::CliError;

#[derive(Parser)]
#[command(name = "corrmax", version, about, disable_help_subcommand = true)]
struct Cli {
    /// Emit machine-readable JSON instead of text reports.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the coincidence rate over n-outcome measurement pairs.
    Solve(SolveArgs),
    /// Evaluate a named bound on a state, or sweep a state family.
    Bound(BoundArgs),
    /// Certify a (state, POM, POM) triple: extremality residual,
    /// discrimination conditions, and second-order classification.
    Check(CheckArgs),
    /// Monte-Carlo minimal-outcome conjecture scan over random states.
    Scan(ScanArgs),
    /// Built-in reproductions: trine saddle, mirror curve, isotropic sweep,
    /// Werner table.
    Demo(DemoArgs),
    /// Re-encode a state or POM file in canonical explicit form.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// State file (JSON; `dims`+`matrix` or `named`).
    #[arg(long)]
    state: PathBuf,
    /// Number of measurement outcomes.
    #[arg(long)]
    n: usize,
    /// Haar-random restarts (default 16).
    #[arg(long)]
    restarts: Option<usize>,
    /// Seed; falls back to CORRMAX_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Gradient-norm stopping tolerance (default 1e-10).
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap per restart (default 5000).
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write the optimal side-1 POM here.
    #[arg(long)]
    out_pom_a: Option<PathBuf>,
    /// Write the optimal side-2 POM here.
    #[arg(long)]
    out_pom_b: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// State file; required unless --list or --sweep is used.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Bound kind (see --list).
    #[arg(long)]
    kind: Option<String>,
    /// Outcome count for the theorem bound (integer or "inf").
    #[arg(long)]
    n: Option<String>,
    /// List registered bound kinds.
    #[arg(long)]
    list: bool,
    /// Sweep a one-parameter family: "isotropic" (w from 0 to 1) or
    /// "werner" (x from -1 to 1).
    #[arg(long)]
    sweep: Option<String>,
    /// Qudit dimension for the werner sweep.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Grid points for sweeps.
    #[arg(long, default_value_t = 21)]
    points: usize,
    /// CSV output path for sweeps.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the matrix behind the bound (S, Sbar, T^(n), T~, or T^(inf))
    /// as p,q,value CSV; requires --kind.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    /// Write the singular values consumed by the bound as p,q,value CSV.
    #[arg(long)]
    dump_singular: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    pom_a: PathBuf,
    #[arg(long)]
    pom_b: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    /// Dimensions as "d1,d2".
    #[arg(long, default_value = "2,2")]
    dims: String,
    /// Number of random states.
    #[arg(long, default_value_t = 1200)]
    count: usize,
    /// Outcome counts as a comma list, ascending.
    #[arg(long, default_value = "")]
    ns: String,
    /// Ginibre rank (default full).
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSONL record file.
    #[arg(long)]
    out: PathBuf,
    /// Skip indices already recorded in --out (hash-checked).
    #[arg(long)]
    resume: bool,
    /// Only recompute the summary of an existing record file.
    #[arg(long)]
    summarize: bool,
    /// Optimizer restarts per state (default 8 for scans).
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 3000)]
    max_iters: usize,
}

#[derive(Args)]
struct DemoArgs {
    #[command(subcommand)]
    which: DemoCommand,
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Trine pair on the maximally entangled state: C = 2/3 saddle.
    Trine,
    /// Mirror-family coincidence curve written as CSV.
    Mirror {
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact two-qubit maximum across the isotropic family.
    Isotropic {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Werner-family table: exact value vs theorem and cross-norm bounds.
    Werner {
        #[arg(long, default_value_t = 3)]
        d: usize,
    },
}

#[derive(Args)]
struct ConvertArgs {
    /// Document kind: "state" or "pom".
    #[arg(long, default_value = "state")]
    kind: String,
    input: PathBuf,
    output: PathBuf,
}

fn main() -> ExitCode {
    // Die quietly on closed pipes (corrmax ... | head) instead of panicking.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => run::solve(args, cli.json),
        Command::Bound(args) => run::bound(args, cli.json),
        Command::Check(args) => run::check(args, cli.json),
        Command::Scan(args) => run::scan(args, cli.json),
        Command::Demo(args) => run::demo(args, cli.json),
        Command::Convert(args) => run::convert(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
