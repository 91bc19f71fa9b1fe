//! `inkdrop` command-line front end.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad config, arguments or data files. Exit 2.
    Input(String),
    /// A single inference had no covering group. Exit 3.
    NoCoverage,
    /// `bench --check` found results outside their bands. Exit 4.
    BandFailure(Vec<String>),
    /// Anything else. Exit 1.
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NoCoverage => 3,
            CliError::BandFailure(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "inkdrop", version, about = "Ink-drop-spread fuzzy modeling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set radius_in=8` or `--set device.r_off=2e4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    Table1,
    Spiral,
    Circles,
    Iris,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it to a file.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run one inference on a saved model.
    Infer {
        model: PathBuf,
        #[arg(required = true, allow_negative_numbers = true)]
        inputs: Vec<f64>,
        /// Print every intermediate degree as JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Run a benchmark and write JSON and CSV reports.
    Bench {
        #[arg(value_enum)]
        kind: BenchKind,
        #[command(flatten)]
        config: ConfigArgs,
        /// Report directory.
        #[arg(long, short, default_value = "reports")]
        out: PathBuf,
        /// Exit with status 4 if a result falls outside its expected band.
        #[arg(long)]
        check: bool,
    },
    /// Program the crossbar twin from a model and compare it with software inference.
    CompareHw {
        model: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write the report here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write one plane as a CSV heatmap.
    DumpPlane {
        model: PathBuf,
        /// 1-based group index.
        #[arg(long)]
        group: usize,
        /// 1-based plane (input variable) index.
        #[arg(long)]
        plane: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { config, out } => {
            commands::train(config.config.as_deref(), &config.overrides, &out)
        }
        Command::Infer {
            model,
            inputs,
            trace,
        } => commands::infer(&model, &inputs, trace),
        Command::Bench {
            kind,
            config,
            out,
            check,
        } => {
            let kind = match kind {
                BenchKind::Table1 => commands::Bench::Table1,
                BenchKind::Spiral => commands::Bench::Spiral,
                BenchKind::Circles => commands::Bench::Circles,
                BenchKind::Iris => commands::Bench::Iris,
            };
            commands::bench(
                kind,
                config.config.as_deref(),
                &config.overrides,
                &out,
                check,
            )
        }
        Command::CompareHw { model, config, out } => commands::compare_hw(
            &model,
            config.config.as_deref(),
            &config.overrides,
            out.as_deref(),
        ),
        Command::DumpPlane {
            model,
            group,
            plane,
            out,
        } => commands::dump_plane(&model, group, plane, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Input(msg) => eprintln!("error: {msg}"),
                CliError::NoCoverage => println!("NO_COVERAGE"),
                CliError::BandFailure(failures) => {
                    for f in failures {
                        eprintln!("out of band: {f}");
                    }
                }
                CliError::Internal(msg) => eprintln!("internal error: {msg}"),
            }
            ExitCode::from(err.exit_code())
        }
    }
}
