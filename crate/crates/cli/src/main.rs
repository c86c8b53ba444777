use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use warpflow_cli::{execute, Command, Invocation};

#[derive(Parser)]
#[command(
    name = "warpflow",
    version,
    about = "Locally constrained curvature flows in warped products"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving the output files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Recorded in the summary; the flow itself is deterministic
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve the initial surface and audit the trace
    Run(Common),
    /// Evaluate functionals, identities and inequalities on the initial surface
    Check(Common),
    /// Tabulate slice values and comparison-function round trips
    SliceProfile(Common),
    /// Repeat `check` or `run` on a ladder of refined grids
    Sweep(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Run(c) => (Command::Run, c),
        Cmd::Check(c) => (Command::Check, c),
        Cmd::SliceProfile(c) => (Command::SliceProfile, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
    };
    let inv = Invocation {
        command,
        config: common.config,
        out_dir: common.out_dir,
        seed: common.seed,
    };
    match execute(&inv) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("warpflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
