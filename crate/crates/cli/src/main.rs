use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thermorisk::commands;
use thermorisk::config::{Command, RunConfig};
use thermorisk::error::CliError;

/// Worst-case model risk under a relative-entropy budget.
#[derive(Parser, Debug)]
#[command(name = "thermorisk", version)]
struct Cli {
    /// Output CSV path [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized steps [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON run configuration; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the merged configuration as JSON and exit without running
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let config = base.merged(cli.out, cli.seed, &cli.command)?;
    if cli.dump_config {
        println!("{}", config.to_json());
        return Ok(());
    }
    commands::run(&config, &cli.command)
}
