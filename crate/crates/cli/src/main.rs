//! Batch driver for the aeromagnetic weak-signal regression pipeline.
//!
//! One run-config TOML file drives every subcommand; flags can override the
//! seed, output directory, and feature preset. Exit codes: 0 success,
//! 1 runtime failure, 2 config/validation failure.

mod commands;
mod config;
mod ledger;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "magnav", version, about = "Weak-signal regression pipeline for aeromagnetic navigation")]
struct Cli {
    /// Run-config TOML; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the feature preset (tl_ins_free | ins_aided | tl_ins_aided).
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Drop the diurnal feature (it needs a base station, not available
    /// in flight).
    #[arg(long, global = true)]
    exclude_diurnal: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic flight with known ground truth.
    Synth,
    /// Clean the input flight and write variance/correlation reports.
    Preprocess,
    /// Forward sequential feature selection.
    SelectFeatures,
    /// Fit a PCA on the active features and export scores.
    Pca,
    /// Fit Tolles-Lawson compensation coefficients.
    TlFit,
    /// Apply fitted coefficients, adding compensated columns.
    TlApply,
    /// Fit the configured model and record the train score.
    Train,
    /// Score a model on the chronological split, or compare two files.
    Evaluate {
        /// Model file (defaults to <out>/model.txt).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Predictions file; requires --truth.
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Ground-truth file; requires --pred.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Permutation and drop-column feature importance.
    Importance,
    /// Cross-validated max_depth sweep.
    Tune,
    /// Aggregate the run ledger into a summary table.
    Report,
    /// Render report CSVs as PNG images.
    Plot {
        /// importance | tune | correlation | pca (default: all available).
        #[arg(long)]
        kind: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CliError::Config)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(preset) = cli.preset {
        config.features.preset = preset;
        config.features.list.clear();
    }
    if cli.exclude_diurnal {
        config.features.exclude_diurnal = true;
    }

    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::Config(format!("cannot create out_dir {}: {e}", config.out_dir.display())))?;

    match cli.command {
        Command::Synth => commands::cmd_synth(&config),
        Command::Preprocess => commands::cmd_preprocess(&config),
        Command::SelectFeatures => commands::cmd_select_features(&config),
        Command::Pca => commands::cmd_pca(&config),
        Command::TlFit => commands::cmd_tl_fit(&config),
        Command::TlApply => commands::cmd_tl_apply(&config),
        Command::Train => commands::cmd_train(&config),
        Command::Evaluate { model, pred, truth } => commands::cmd_evaluate(&config, model, pred, truth),
        Command::Importance => commands::cmd_importance(&config),
        Command::Tune => commands::cmd_tune(&config),
        Command::Report => commands::cmd_report(&config),
        Command::Plot { kind } => commands::cmd_plot(&config, kind),
    }
}
