//! `nifit`: simulate, validate and fit two-level dissipative interferometry.
//!
//! Exit status: 0 success, 2 complete-positivity violation, 3 fit did not
//! converge, 4 I/O or parse error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sgi::config::RunConfig;
use sgi::fitting::{fit_pattern, synthesize_counts, Exposure};
use sgi::interference::{read_fringe_csv, write_fringe_csv, FringeSample};
use sgi::pipeline::{self, FitReport, Report};
use thiserror::Error;

const EXIT_CP_VIOLATION: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "nifit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the complete-positivity inequalities for `[dissipation]`.
    ValidateCp(Common),
    /// Tabulate exit intensities (or counts) over the phase grid as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Skip the first-order comparison columns.
        #[arg(long)]
        exact_only: bool,
    },
    /// Draw a synthetic fringe scan from `[count_model]` as CSV.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit the fringe model to a CSV scan.
    Fit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        /// Overrides `[fit] seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Extract A, Re B, a and alpha from a saved fit or from `[fit_values]`.
    Extract {
        #[command(flatten)]
        common: Common,
        /// Report written by `nifit fit`.
        #[arg(long, value_parser = existing_file)]
        fit: Option<PathBuf>,
        /// Also estimate alpha under the reduced a = 0 model.
        #[arg(long)]
        simplified: bool,
    },
    /// Fit a CSV scan and run the whole extraction chain.
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        simplified: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, short, value_parser = existing_file)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Fringe scan: phi,n_plus,sigma_plus,n_minus,sigma_minus.
    #[arg(long, short, value_parser = existing_file)]
    data: PathBuf,
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let path = PathBuf::from(s);
    if path.is_file() {
        Ok(path)
    } else {
        Err(format!("no such file: {s}"))
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] sgi::config::ConfigError),
    #[error(transparent)]
    Pipeline(#[from] sgi::pipeline::PipelineError),
    #[error(transparent)]
    Fit(#[from] sgi::fitting::FitError),
    #[error("{path}: {source}")]
    Data {
        path: String,
        source: sgi::interference::InterferenceError,
    },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Csv(#[from] sgi::interference::InterferenceError),
    #[error("{0}")]
    Usage(String),
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    match &common.config {
        Some(path) => Ok(RunConfig::from_path(path)?),
        None => Ok(RunConfig::default()),
    }
}

fn load_data(path: &Path) -> Result<Vec<FringeSample>, CliError> {
    let file = File::open(path)?;
    read_fringe_csv(file).map_err(|source| CliError::Data {
        path: path.display().to_string(),
        source,
    })
}

fn output(common: &Common) -> Result<Box<dyn Write>, CliError> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(common: &Common, json: &str) -> Result<(), CliError> {
    let mut out = output(common)?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(())
}

fn emit_report(common: &Common, report: &Report) -> Result<u8, CliError> {
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    emit_json(common, &report.to_json())?;
    Ok(if report.converged() { 0 } else { EXIT_NOT_CONVERGED })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::ValidateCp(common) => {
            let config = load_config(&common)?;
            let report = pipeline::validate_cp(&config.dissipation);
            emit_json(&common, &serde_json::to_string_pretty(&report).expect("serializable"))?;
            Ok(if report.is_cp { 0 } else { EXIT_CP_VIOLATION })
        }
        Command::Simulate { common, exact_only } => {
            let config = load_config(&common)?;
            let table = pipeline::simulate(&config, exact_only)?;
            for warning in &table.warnings {
                eprintln!("warning: {warning}");
            }
            let mut out = output(&common)?;
            table.write_csv(&mut out).map_err(|e| CliError::Usage(e.to_string()))?;
            out.flush()?;
            Ok(0)
        }
        Command::Synth { common, seed } => {
            let config = load_config(&common)?;
            let model = config.count_model()?;
            let exposure = config.count_model.map_or(1.0, |m| m.exposure);
            let samples = synthesize_counts(&model, &config.grid.phases(), Exposure::Poisson(exposure), seed);
            let mut out = output(&common)?;
            write_fringe_csv(&mut out, &samples)?;
            out.flush()?;
            Ok(0)
        }
        Command::Fit { common, data, seed } => {
            let mut config = load_config(&common)?;
            if let Some(seed) = seed {
                config.fit.seed = seed;
            }
            let samples = load_data(&data.data)?;
            let fit = fit_pattern(&samples, &config.fit)?;
            let report = FitReport::new(&fit);
            if !fit.converged {
                eprintln!("warning: fit did not converge after {} iterations", fit.iterations);
            }
            emit_json(&common, &serde_json::to_string_pretty(&report).expect("serializable"))?;
            Ok(if fit.converged { 0 } else { EXIT_NOT_CONVERGED })
        }
        Command::Extract {
            common,
            fit,
            simplified,
        } => {
            let config = load_config(&common)?;
            let simplified = simplified || config.extraction.simplified;
            let report = match (&fit, &config.fit_values) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path)?;
                    let fit: FitReport = serde_json::from_str(&text).map_err(|source| CliError::Json {
                        path: path.display().to_string(),
                        source,
                    })?;
                    pipeline::extract_from_fit(&fit.to_fit_result(), &config, simplified)?
                }
                (None, Some(values)) => pipeline::extract_from_values(values, &config, simplified)?,
                (None, None) => {
                    return Err(CliError::Usage(
                        "extract needs --fit or a [fit_values] section in the configuration".into(),
                    ))
                }
            };
            emit_report(&common, &report)
        }
        Command::Report {
            common,
            data,
            seed,
            simplified,
        } => {
            let mut config = load_config(&common)?;
            if let Some(seed) = seed {
                config.fit.seed = seed;
            }
            let simplified = simplified || config.extraction.simplified;
            let samples = load_data(&data.data)?;
            let report = pipeline::run_fit_extract(&samples, &config, simplified)?;
            emit_report(&common, &report)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // clap uses 2 for usage errors, which is reserved for CP violations
            return if err.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
