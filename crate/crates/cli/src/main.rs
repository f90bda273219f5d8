use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use config::{Format, Resolved, RunConfig};
use error::CliError;

/// Numerical checks of moving-frame identities on negatively curved surfaces.
#[derive(Debug, Parser)]
#[command(name = "framecheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Comma-separated output formats (csv, json), overriding the config.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<Format>>,

    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Curvature statistics over the grid domain.
    SurfaceInfo,
    /// Every residual check, at two grid levels.
    Verify,
    /// Build the asymptotic net and write it out.
    Net,
    /// Compare the two area computations on the net.
    Area,
    /// Disk areas, isometry invariance and the Picard demo on the Poincaré disk.
    Hyperbolic,
}

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    if let Some(f) = &cli.format {
        config.formats = Some(f.clone());
    }
    let cfg = Resolved::new(config)?;
    match cli.command {
        Command::SurfaceInfo => commands::surface_info(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Net => commands::net(&cfg),
        Command::Area => commands::area(&cfg),
        Command::Hyperbolic => commands::hyperbolic(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if !cli.quiet {
                let mut out = std::io::stdout().lock();
                for l in &outcome.lines {
                    if writeln!(out, "{l}").is_err() {
                        break;
                    }
                }
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                if cli.quiet {
                    eprintln!("one or more checks failed");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
