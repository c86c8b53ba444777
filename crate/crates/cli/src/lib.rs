//! Configuration-driven experiments on top of `warpflow-core`: flow runs
//! with audited traces, static checks of initial surfaces, slice profiles
//! and grid-refinement sweeps.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

pub use commands::{check_surface, run_experiment, Audit, CheckReport, RunResult, RunSummary};
pub use config::Config;
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Check,
    SliceProfile,
    Sweep,
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
}

/// Runs one subcommand and returns the exit status (0 pass, 2 audit
/// failure) or the error that stopped it.
pub fn execute(inv: &Invocation) -> Result<i32, CliError> {
    let config = Config::load(&inv.config)?;
    dispatch(inv.command, &config, &inv.out_dir, inv.seed)
}

pub fn dispatch(
    command: Command,
    config: &Config,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<i32, CliError> {
    match command {
        Command::Run => commands::cmd_run(config, out_dir, seed),
        Command::Check => commands::cmd_check(config, out_dir),
        Command::SliceProfile => commands::cmd_slice_profile(config, out_dir),
        Command::Sweep => commands::cmd_sweep(config, out_dir, seed),
    }
}
