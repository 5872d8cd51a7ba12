use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smkt::config::{Analysis, RunConfig};
use smkt::pipeline::{run_pipeline, run_synth};

/// Cross-correlation spectra, subsector detection, leverage curves and
/// recurrence-interval statistics for daily market CSVs.
#[derive(Parser)]
#[command(name = "smkt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory (default: out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// override the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation matrix, spectrum and Marchenko-Pastur screening
    Crosscorr,
    /// Subsector tables and the anti-correlation scan
    Sectors,
    /// Return-volatility correlation of the index series
    Leverage,
    /// Recurrence-interval distributions and power-law fits
    Recurrence,
    /// Generate a synthetic market CSV with planted structure
    Synth,
    /// Run every analysis selected in the config
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: [setup] --config <path> is required");
            return ExitCode::FAILURE;
        }
    };
    let mut config = match RunConfig::from_file(&config_path) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("error: [setup] {message}");
            return ExitCode::FAILURE;
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out_dir = cli.out.unwrap_or_else(|| PathBuf::from("out"));

    let result = match cli.command {
        Command::Synth => run_synth(&config, &out_dir),
        Command::Report => run_pipeline(&config, &out_dir, None),
        Command::Crosscorr => run_pipeline(&config, &out_dir, Some(Analysis::Crosscorr)),
        Command::Sectors => run_pipeline(&config, &out_dir, Some(Analysis::Sectors)),
        Command::Leverage => run_pipeline(&config, &out_dir, Some(Analysis::Leverage)),
        Command::Recurrence => run_pipeline(&config, &out_dir, Some(Analysis::Recurrence)),
    };
    match result {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for f in &summary.files {
                println!("{}", out_dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
