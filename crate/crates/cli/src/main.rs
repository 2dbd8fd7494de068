//! `koa`: simulate, preprocess, train, evaluate, predict and report.
//!
//! Exit status: 0 on success, 1 on runtime or training failure, 2 on
//! configuration or input validation errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Knee-osteoarthritis grading from bioimpedance readings.
#[derive(Debug, Parser)]
#[command(name = "koa", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides KOA_OUTPUT_DIR and the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Input CSV; overrides the config file.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Fit the scaler on every row before splitting.
    #[arg(long)]
    paper_faithful: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labelled dataset with the acquisition simulator.
    Simulate {
        /// Number of severity grades.
        #[arg(long)]
        grades: Option<u8>,
        /// |Z| increase per grade.
        #[arg(long)]
        severity_scale: Option<f64>,
    },
    /// Encode, split and standardise a dataset.
    Preprocess(DataArgs),
    /// Train, then evaluate on the held-out split.
    Train(DataArgs),
    /// Evaluate a checkpoint on a labelled dataset (stored preprocessing, no refit).
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Print the predicted grade and class probabilities for each input row.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        /// CSV with the feature columns (the label column is optional).
        #[arg(long)]
        input: PathBuf,
    },
    /// Rebuild report artifacts from a scores CSV written by train or evaluate.
    Report {
        #[arg(long)]
        scores: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
