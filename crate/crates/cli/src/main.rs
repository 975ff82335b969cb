use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qigate_cli::commands::{cmd_run, cmd_sweep, cmd_truth_table, load_config, Options};
use qigate_cli::table::Table;
use qigate_cli::CliError;

/// Quantum-interrogation gate simulator.
#[derive(Parser)]
#[command(name = "qigate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, exactly or by sampling trajectories.
    Run(Common),
    /// Gate action on the four computational basis inputs.
    TruthTable(Common),
    /// Evaluate every point of a parameter grid.
    Sweep(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Experiment description (`key = value` lines).
    config: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    parallel: u16,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (common, cmd): (&Common, fn(_, _) -> Result<Table, CliError>) = match &cli.command {
        Command::Run(c) => (c, cmd_run),
        Command::TruthTable(c) => (c, cmd_truth_table),
        Command::Sweep(c) => (c, cmd_sweep),
    };
    let cfg = load_config(&common.config, common.seed)?;
    let opts = Options {
        parallel: common.parallel as usize,
        seed: common.seed,
    };
    let table = cmd(cfg, opts)?;
    let text = match common.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Runtime(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qigate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
