//! Command-line front end: QC, grid import, spatial screening, and the full
//! validation pipeline, all driven by one TOML config.
//!
//! Exit codes: 0 success, 2 config error, 3 unreadable or unwritable input,
//! 4 internal invariant breach.

use clap::{Args, Parser, Subcommand};
use rainval::config::RunConfig;
use rainval::grid::import_long_csv;
use rainval::report::{emit_outputs, run_pipeline_with, PipelineError, StageSet, ValidationReport};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rainval",
    version,
    about = "Validate gridded rainfall products against rain-gauge observations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for station x product analysis (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run gauge quality control and report station eligibility.
    Qc(RunArgs),
    /// Grid utilities.
    #[command(subcommand)]
    Grid(GridCommand),
    /// Compute climatology fields and the spatial-consistency screen.
    Spatial(RunArgs),
    /// Run the full validation pipeline.
    Validate(RunArgs),
    /// Fit seasonal occurrence models and the threshold sweep.
    Seasonal(RunArgs),
    /// Compute intensity-category detection skill.
    Intensity(RunArgs),
}

#[derive(Subcommand)]
enum GridCommand {
    /// Convert long-format CSV (date,lat,lon,value) to descriptor + payload.
    ImportCsv(ImportArgs),
}

#[derive(Args)]
struct ImportArgs {
    /// Input CSV with header `date,lat,lon,value`.
    #[arg(long)]
    input: PathBuf,
    /// Output JSON descriptor path.
    #[arg(long)]
    descriptor: PathBuf,
    /// Output binary payload path (.f32).
    #[arg(long)]
    payload: PathBuf,
    /// Sentinel written for missing cells.
    #[arg(long, default_value_t = -999.0)]
    sentinel: f64,
    /// Value tokens treated as missing (repeatable).
    #[arg(long = "missing-token", default_values_t = [String::from("NA"), String::new()])]
    missing_tokens: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Qc(args) => run_stages(&args, StageSet::none(), "qc"),
        Command::Spatial(args) => run_stages(&args, StageSet::spatial_only(), "spatial"),
        Command::Validate(args) => run_stages(&args, StageSet::all(), "validate"),
        Command::Seasonal(args) => run_stages(&args, StageSet::seasonal_only(), "seasonal"),
        Command::Intensity(args) => run_stages(&args, StageSet::intensity_only(), "intensity"),
        Command::Grid(GridCommand::ImportCsv(args)) => import_csv(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rainval: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run_stages(args: &RunArgs, stages: StageSet, label: &str) -> Result<(), PipelineError> {
    let config = RunConfig::load(&args.config).map_err(PipelineError::from)?;
    let report = run_pipeline_with(&config, args.jobs, stages)?;
    let files = emit_outputs(&report, &config.out_dir)?;
    print_summary(&report, label);
    println!("{label}: wrote {} files to {}", files.len(), config.out_dir.display());
    Ok(())
}

fn print_summary(report: &ValidationReport, label: &str) {
    for station in &report.stations {
        println!(
            "{label}: station {} eligible={} completeness={}",
            station.station_id, station.qc.eligible, station.qc.completeness_after
        );
    }
    for product in &report.products {
        if let Some(verdict) = product.verdict {
            println!(
                "{label}: product {} spatial verdict={}{}",
                product.product_id,
                verdict.code(),
                if product.excluded_for_inconsistency {
                    " (excluded)"
                } else {
                    ""
                }
            );
        }
    }
    for pair in &report.pairs {
        match &pair.status {
            rainval::report::PairStatus::Scored => {
                println!(
                    "{label}: {} x {} scored ({} paired days)",
                    pair.station_id,
                    pair.product_id,
                    pair.n_paired_days.unwrap_or(0)
                );
            }
            rainval::report::PairStatus::Excluded { reason } => {
                println!(
                    "{label}: {} x {} excluded: {reason}",
                    pair.station_id, pair.product_id
                );
            }
        }
    }
}

fn import_csv(args: &ImportArgs) -> Result<(), PipelineError> {
    let raw = std::fs::read_to_string(&args.input)
        .map_err(|e| PipelineError::Input(format!("{}: {e}", args.input.display())))?;
    let (descriptor, payload) = import_long_csv(&raw, args.sentinel, &args.missing_tokens)
        .map_err(|e| PipelineError::Input(e.to_string()))?;
    let descriptor_json = serde_json::to_string_pretty(&descriptor)
        .map_err(|e| PipelineError::Internal(format!("serialize descriptor: {e}")))?;
    std::fs::write(&args.descriptor, format!("{descriptor_json}\n"))
        .map_err(|e| PipelineError::Input(format!("write {}: {e}", args.descriptor.display())))?;
    std::fs::write(&args.payload, &payload)
        .map_err(|e| PipelineError::Input(format!("write {}: {e}", args.payload.display())))?;
    println!(
        "imported {}x{} cells x {} days -> {} + {}",
        descriptor.nlat,
        descriptor.nlon,
        descriptor.ntime,
        args.descriptor.display(),
        args.payload.display()
    );
    Ok(())
}
