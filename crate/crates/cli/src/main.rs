mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::{Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dlplab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Core(dlplab_core::Error::InvalidInput(_)) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Spectrum,
    Dirichlet,
    MatchVerify,
    MatchMelnikov,
    MatchPowers,
    BranchPoints,
    Reflect,
    TrapCheck,
    Reciprocity,
    SphereCheck,
    GaussCheck,
}

/// Double layer potential lab: boundary operators, matching pairs and
/// Schwarz-function reflections on planar curves.
#[derive(Debug, Parser)]
#[command(name = "dlplab", version)]
struct Cli {
    command: Command,
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// output directory for report.json and CSV artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// node count, overriding the config
    #[arg(long = "N")]
    n: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli
        .command
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let ov = Overrides { n: cli.n, seed: cli.seed };
    let (cfg, out_in_config) = match RunConfig::load(&cli.config, &name, &ov) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("dlplab {name}: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let out = cli
        .out
        .or(out_in_config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("dlplab-out"));
    let outcome = commands::run(&cfg).and_then(|o| report::write(&cfg, &o, &out).map(|_| o));
    match outcome {
        Ok(o) => {
            println!("{}", report::summary_line(&cfg, &o));
            if o.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("dlplab {name} ({}): {e}", cfg.command.module());
            ExitCode::from(e.exit_code())
        }
    }
}
