use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kelvin_wave::cli::{cmd_compare, cmd_convergence, cmd_reference, cmd_run, exit_code, load_config};
use kelvin_wave::Error;

/// Wave propagation on unbounded domains via the Minkowski–Kelvin transform.
#[derive(Parser)]
#[command(name = "kwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on the bounded grid and export frames, images and costs.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve on a truncated physical box.
    Reference {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the transformed solution with the truncated-box reference.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a refinement study and fit the observed order.
    Convergence {
        #[arg(long)]
        config: PathBuf,
    },
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("KW_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| Error::Config(format!("KW_THREADS: expected a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("KW_THREADS: {e}")))
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).unwrap_or_default()
}

fn execute(cli: Cli) -> Result<String, Error> {
    configure_threads()?;
    match cli.command {
        Command::Run { config } => Ok(pretty(&cmd_run(&load_config(&config)?)?)),
        Command::Reference { config } => Ok(pretty(&cmd_reference(&load_config(&config)?)?)),
        Command::Compare { config } => {
            let mut report = cmd_compare(&load_config(&config)?)?;
            // the full table is in compare.json
            report.residuals.clear();
            Ok(pretty(&report))
        }
        Command::Convergence { config } => Ok(pretty(&cmd_convergence(&load_config(&config)?)?)),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("kwave: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
