mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Bloch bands, gaps and linear evolution for water waves over a periodic bottom.
#[derive(Parser)]
#[command(name = "bloch-dno", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Bands over the θ-grid (bands.csv) and gap edges (gaps.json).
    BandStructure,
    /// Gap widths and centres over an ε list (gap_scan.csv).
    GapScan,
    /// Power-law fit of gap widths over an ε ladder (scaling.json).
    GapScaling,
    /// Series operator against the direct boundary-value solve (oracle.json).
    ValidateOracle,
    /// Linearized time evolution at fixed θ (evolution.csv).
    Evolve,
}

fn run(cli: Cli) -> CliResult<()> {
    let path = cli
        .config
        .ok_or_else(|| CliError::config("--config <path> is required"))?;
    let cfg = RunConfig::load(&path)?;
    let out = cli
        .out
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| CliError::config("no output directory: pass --out or set 'out'"))?;
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    let artifacts = match cli.command {
        Command::BandStructure => commands::band_structure(&cfg)?,
        Command::GapScan => commands::gap_scan(&cfg)?,
        Command::GapScaling => commands::gap_scaling(&cfg)?,
        Command::ValidateOracle => commands::validate_oracle(&cfg)?,
        Command::Evolve => commands::evolve(&cfg)?,
    };
    output::write_all(&out, &artifacts)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
