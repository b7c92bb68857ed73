use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use doublet_core::estimation::{fit_map, fit_trace, FitError, FitReport, LmDiagnostics};
use doublet_core::response::{
    read_map_csv, sweep, synthesize_map, write_map_csv, write_sweep_csv, CsvError, ResponseError,
};
use serde::{Deserialize, Serialize};

use crate::args::{Args, Command, InputFormat};
use crate::config::RunConfig;
use crate::CliError;

/// What a failed fit leaves behind in its output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialReport {
    pub converged: bool,
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled_gradient: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<String>,
}

impl PartialReport {
    fn from_error(err: &FitError) -> Self {
        let diag: Option<&LmDiagnostics> = match err {
            FitError::ConvergenceFailure { diagnostics } => Some(diagnostics),
            _ => None,
        };
        Self {
            converged: false,
            error: err.to_string(),
            iterations: diag.map(|d| d.iterations),
            cost: diag.map(|d| d.cost),
            scaled_gradient: diag.map(|d| d.scaled_gradient),
            termination: diag.map(|d| format!("{:?}", d.termination)),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn response_err(e: ResponseError) -> CliError {
    CliError::Config(e.to_string())
}

/// Writes through a buffer so a failed serializer leaves no half file.
fn write_file(path: &Path, fill: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    w.write_all(&buf).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

fn csv_err(path: &Path, e: CsvError) -> CliError {
    match e {
        CsvError::Io(io) => io_err(path, io),
        CsvError::Format { .. } => CliError::Input(format!("{}: {e}", path.display())),
    }
}

fn default_sweep_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("map");
    out.with_file_name(format!("{stem}_sweep.csv"))
}

/// Map and sweep summary over the configured field axis.
pub fn simulate(config: &RunConfig, out: &Path, sweep_out: Option<&Path>, seed: Option<u64>) -> Result<String, CliError> {
    let medium = config.build_medium()?;
    let b = config.b_axis();
    let map = synthesize_map(&medium, &config.cavity, &b, &config.f_axis(), config.noise(seed))
        .map_err(response_err)?;
    let summary = sweep(&medium, &config.cavity, &b).map_err(response_err)?;
    let sweep_path = sweep_out.map(Path::to_path_buf).unwrap_or_else(|| default_sweep_path(out));

    write_file(out, |buf| write_map_csv(&map, buf).map_err(|e| csv_err(out, e)))?;
    write_file(&sweep_path, |buf| {
        write_sweep_csv(&summary.records(), buf).map_err(|e| csv_err(&sweep_path, e))
    })?;
    Ok(format!(
        "wrote {} x {} map to {} and sweep summary to {}",
        map.n_rows(),
        map.f_axis.len(),
        out.display(),
        sweep_path.display()
    ))
}

/// Single-row map at field `b`; identical to `simulate` with `n_b = 1`.
pub fn spectrum(config: &RunConfig, b: f64, out: &Path, seed: Option<u64>) -> Result<String, CliError> {
    if !b.is_finite() {
        return Err(CliError::Config("--b: must be finite".into()));
    }
    let medium = config.build_medium()?;
    let map = synthesize_map(&medium, &config.cavity, &[b], &config.f_axis(), config.noise(seed))
        .map_err(response_err)?;
    write_file(out, |buf| write_map_csv(&map, buf).map_err(|e| csv_err(out, e)))?;
    Ok(format!("wrote spectrum at {} mT to {}", b * 1e3, out.display()))
}

fn fit_input(config: &RunConfig, input: &Path, format: InputFormat) -> Result<Result<FitReport, FitError>, CliError> {
    let file = File::open(input).map_err(|e| io_err(input, e))?;
    let map = read_map_csv(std::io::BufReader::new(file)).map_err(|e| csv_err(input, e))?;
    let options = config.map_fit_options();
    let f_ref = config.cavity.f_c;
    Ok(match format {
        InputFormat::Map => fit_map(&map, f_ref, &options),
        InputFormat::Trace => {
            if map.n_rows() != 1 {
                return Err(CliError::Input(format!(
                    "{}: a trace holds one field value, found {}",
                    input.display(),
                    map.n_rows()
                )));
            }
            fit_trace(&map.f_axis, map.row(0), f_ref, &options)
        }
    })
}

fn to_json<T: Serialize>(value: &T, buf: &mut Vec<u8>) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *buf, value).map_err(|e| CliError::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(())
}

/// Fits `input` and writes the report. On a numerical failure the output
/// holds a [`PartialReport`] and the error carries exit code 4.
pub fn fit(config: &RunConfig, input: &Path, out: &Path, format: InputFormat) -> Result<String, CliError> {
    match fit_input(config, input, format)? {
        Ok(report) => {
            write_file(out, |buf| to_json(&report, buf))?;
            Ok(report.summary())
        }
        Err(FitError::InvalidInput(msg)) => Err(CliError::Input(format!("{}: {msg}", input.display()))),
        Err(FitError::Response(e)) => Err(CliError::Input(format!("{}: {e}", input.display()))),
        Err(e) => {
            let partial = PartialReport::from_error(&e);
            write_file(out, |buf| to_json(&partial, buf))?;
            Err(CliError::Numerical(e.to_string()))
        }
    }
}

/// Executes a parsed command line and returns the line to print on success.
pub fn run(args: Args) -> Result<String, CliError> {
    match args.command {
        Command::Simulate { config, out, sweep_out, seed } => {
            simulate(&RunConfig::load(&config)?, &out, sweep_out.as_deref(), seed)
        }
        Command::Spectrum { config, out, b, b_mt, seed } => {
            let b = b.or(b_mt.map(|v| v * 1e-3)).expect("clap requires one of --b, --b-mt");
            spectrum(&RunConfig::load(&config)?, b, &out, seed)
        }
        Command::Fit { input, config, out, format, seed: _ } => fit(&RunConfig::load(&config)?, &input, &out, format),
    }
}
