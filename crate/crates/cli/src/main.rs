//! `quasilocal`: batch driver for model construction, locality scans,
//! oracle verification, Schmidt analyses and PT phase scans.

mod commands;
mod config;
mod fail;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use fail::CliError;

#[derive(Parser)]
#[command(name = "quasilocal", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file with run parameters; command-line flags take precedence.
    #[arg(long = "config", global = true)]
    config_file: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write the Hamiltonian and reduced metric of a model.
    Model,
    /// Kernel-rank locality scan over a family of subsystems.
    Scan,
    /// Compare the kernel criterion with the Fock-space oracle.
    Verify,
    /// Operator Schmidt decomposition of a bipartite metric.
    Schmidt,
    /// PT phase scan over a grid of Im γ.
    Spectrum,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let base = match &cli.config_file {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = cli.run.over(base);
    cfg.validate()?;
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::validation(format!("thread pool: {e}")))?;
    }
    let out = match cli.command {
        Command::Model => commands::model(&cfg),
        Command::Scan => commands::scan(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Schmidt => commands::schmidt(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
    }?;
    if let Some(dir) = &cfg.out {
        output::write_all(dir, &out.artifacts)?;
    }
    print!("{}", out.summary);
    for note in &out.notes {
        eprintln!("{note}");
    }
    Ok(match out.failure {
        Some(f) => f.report(),
        None => ExitCode::SUCCESS,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return CliError::validation(e.kind().to_string() + ": " + e.to_string().trim()).report(),
    };
    run(cli).unwrap_or_else(|e| e.report())
}
