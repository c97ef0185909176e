//! `celf` — train, evaluate, and apply loss-field shadowing models.
//!
//! Subcommands: fit | train | predict | evaluate | tune | synth |
//! export-field. Every command is deterministic given its inputs, config,
//! and seeds; wall-clock diagnostics go to stderr (and the opt-in timing
//! CSV), never into data artifacts.

mod app_config;
mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use app_config::ConfigOverrides;

#[derive(Parser)]
#[command(
    name = "celf",
    version,
    about = "Site-trained shadowing prediction from link power measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct CommonOpts {
    /// Key=value config file (see README for keys).
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Seed override for splits and generators.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Solver override.
    #[arg(long, global = true, value_parser = ["auto", "map", "mne"])]
    solver: Option<String>,
    /// Train fraction for splits (1.0 trains on every row).
    #[arg(long, global = true)]
    ratio: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the log-distance path-loss model and report the fading variance.
    Fit {
        /// Measurement CSV.
        #[arg(long)]
        data: std::path::PathBuf,
        /// Optional text report path (stdout otherwise).
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        hyper: HyperFlags,
    },
    /// Split, fit, and train a loss-field model; write the model file.
    Train {
        #[arg(long)]
        data: std::path::PathBuf,
        /// Output model file.
        #[arg(long)]
        model_out: std::path::PathBuf,
        /// Write the split as <prefix>_train.csv / <prefix>_test.csv.
        #[arg(long)]
        split_out: Option<std::path::PathBuf>,
        /// Write phase timings CSV (wall-clock; non-deterministic).
        #[arg(long)]
        timing_out: Option<std::path::PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        hyper: HyperFlags,
    },
    /// Predict shadowing and received power for links in a CSV.
    Predict {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        links: std::path::PathBuf,
        #[arg(long)]
        out: std::path::PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Evaluate a model on a test CSV; write summary/residual reports.
    Evaluate {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        test: std::path::PathBuf,
        /// Output prefix for <prefix>.txt, <prefix>_summary.csv,
        /// <prefix>_residuals.csv.
        #[arg(long)]
        out_prefix: std::path::PathBuf,
        /// Also score the Okumura-Hata baseline (needs hata.* config keys).
        #[arg(long)]
        hata: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Grid-search hyperparameters by k-fold cross-validation.
    Tune {
        #[arg(long)]
        data: std::path::PathBuf,
        /// Key=value grid file (candidate lists per hyperparameter).
        #[arg(long)]
        grid: std::path::PathBuf,
        /// CV table CSV output.
        #[arg(long)]
        out: std::path::PathBuf,
        /// Retrain on all data with the winner and write the model here.
        #[arg(long)]
        retrain: Option<std::path::PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate a synthetic measurement campaign.
    Synth {
        /// Built-in preset name (indoor-like | outdoor-like).
        #[arg(long, conflicts_with = "scenario")]
        preset: Option<String>,
        /// Scenario key=value file.
        #[arg(long)]
        scenario: Option<std::path::PathBuf>,
        /// Output measurement CSV.
        #[arg(long)]
        out: std::path::PathBuf,
        /// Ground-truth field CSV.
        #[arg(long)]
        truth_out: Option<std::path::PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Export a model's loss field as CSV + graymap + mapping sidecar.
    ExportField {
        #[arg(long)]
        model: std::path::PathBuf,
        /// Writes <prefix>.csv, <prefix>.pgm, <prefix>_mapping.txt.
        #[arg(long)]
        out_prefix: std::path::PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Per-hyperparameter flags; each overrides its config key.
#[derive(clap::Args, Debug, Default)]
struct HyperFlags {
    #[arg(long)]
    pixel_width: Option<f64>,
    #[arg(long)]
    shadow_ratio: Option<f64>,
    #[arg(long)]
    space_constant: Option<f64>,
    #[arg(long)]
    excess_length: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.stage, e.error);
            ExitCode::FAILURE
        }
    }
}

/// An error tagged with the pipeline stage that produced it.
pub struct StageError {
    pub stage: &'static str,
    pub error: celf::Error,
}

pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T> Stage<T> for celf::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

impl<T> Stage<T> for std::io::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|error| StageError {
            stage,
            error: celf::Error::Io(error),
        })
    }
}

fn run(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Fit {
            data,
            out,
            common,
            hyper,
        } => commands::fit(&data, out.as_deref(), &overrides(&common, &hyper)),
        Command::Train {
            data,
            model_out,
            split_out,
            timing_out,
            common,
            hyper,
        } => commands::train(
            &data,
            &model_out,
            split_out.as_deref(),
            timing_out.as_deref(),
            &overrides(&common, &hyper),
        ),
        Command::Predict {
            model,
            links,
            out,
            common,
        } => commands::predict(&model, &links, &out, &overrides(&common, &HyperFlags::default())),
        Command::Evaluate {
            model,
            test,
            out_prefix,
            hata,
            common,
        } => commands::evaluate(
            &model,
            &test,
            &out_prefix,
            hata,
            &overrides(&common, &HyperFlags::default()),
        ),
        Command::Tune {
            data,
            grid,
            out,
            retrain,
            common,
        } => commands::tune(
            &data,
            &grid,
            &out,
            retrain.as_deref(),
            &overrides(&common, &HyperFlags::default()),
        ),
        Command::Synth {
            preset,
            scenario,
            out,
            truth_out,
            common,
        } => commands::synth(
            preset.as_deref(),
            scenario.as_deref(),
            &out,
            truth_out.as_deref(),
            &overrides(&common, &HyperFlags::default()),
        ),
        Command::ExportField {
            model,
            out_prefix,
            common: _,
        } => commands::export_field(&model, &out_prefix),
    }
}

fn overrides(common: &CommonOpts, hyper: &HyperFlags) -> ConfigOverrides {
    ConfigOverrides {
        config_path: common.config.clone(),
        seed: common.seed,
        solver: common.solver.clone(),
        ratio: common.ratio,
        pixel_width: hyper.pixel_width,
        shadow_ratio: hyper.shadow_ratio,
        space_constant: hyper.space_constant,
        excess_length: hyper.excess_length,
        alpha: hyper.alpha,
    }
}
