//! Command-line front end. See `docs/config.md` for the configuration schema.

pub mod config;
pub mod run;
pub mod table;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, parse_dims, ConfigError, Mode, ModelSpec, OutputFormat, RunConfig};
pub use run::{run, RunError};
pub use table::{ResultTable, TableError};

#[derive(Debug, Parser)]
#[command(name = "jt-cqed", version, about = "Two-frequency Jahn-Teller circuit QED simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest Hamiltonian eigenvalues, optionally over a 1-D or 2-D sweep.
    Eigens(CommonArgs),
    /// Emission spectrum at one parameter point (or a map if [sweep] is set).
    Spectrum(CommonArgs),
    /// Emission spectrum map over the [sweep] axis, long format.
    Sweep(CommonArgs),
    /// Parameter dictionary in both directions with frequency ratio.
    MapParams(CommonArgs),
    /// Resonator frequencies and hopping from circuit elements.
    Hardware(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Fock levels per mode, `d1,d2`.
    #[arg(long)]
    pub dims: Option<String>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Command {
    pub fn split(self) -> (Mode, CommonArgs) {
        match self {
            Command::Eigens(a) => (Mode::Eigens, a),
            Command::Spectrum(a) => (Mode::Spectrum, a),
            Command::Sweep(a) => (Mode::Sweep, a),
            Command::MapParams(a) => (Mode::MapParams, a),
            Command::Hardware(a) => (Mode::Hardware, a),
        }
    }
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> RunError {
    RunError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Loads the config and applies command-line overrides.
pub fn resolve_config(args: &CommonArgs) -> Result<RunConfig, RunError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(dims) = &args.dims {
        cfg.space.dims = parse_dims(dims)?;
    }
    if let Some(format) = &args.format {
        cfg.output.format = format.parse()?;
    }
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.clone());
    }
    if args.jobs.is_some() {
        cfg.jobs = args.jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one subcommand end to end, writing the table to the configured
/// destination.
pub fn execute(command: Command) -> Result<(), RunError> {
    let (mode, args) = command.split();
    let cfg = resolve_config(&args)?;
    let table = run(mode, &cfg)?;
    let text = match cfg.output.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    match &cfg.output.path {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e))?,
        None => print!("{text}"),
    }
    Ok(())
}
