use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shearlab_cli::{run_file, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "shearlab", version, about = "Run shearlab scenarios from config files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `[job] output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random seed (overrides `[job] seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads, 0 for automatic. Falls back to SHEARLAB_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("SHEARLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("SHEARLAB_THREADS must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let Command::Run { config, out, seed, threads: flag } = command;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads(flag)?)
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    let output = pool.install(|| run_file(&config, &RunOptions { out, seed }))?;
    for line in &output.summary {
        println!("{line}");
    }
    for file in &output.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
