use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "wgm-doublet", version, about = "Simulate and fit whispering-gallery doublet transmission maps")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Multi-row field × detuning map.
    Map,
    /// Single-field spectrum (a map with one row).
    Trace,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transmission map over the configured field sweep, plus a sweep summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Map CSV; the sweep summary goes to `<stem>_sweep.csv` beside it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        sweep_out: Option<PathBuf>,
        /// Overrides `noise.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Transmission spectrum at a single field.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Applied field in tesla.
        #[arg(long, allow_hyphen_values = true, required_unless_present = "b_mt", conflicts_with = "b_mt")]
        b: Option<f64>,
        /// Applied field in millitesla.
        #[arg(long = "b-mt", allow_hyphen_values = true)]
        b_mt: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a map or spectrum and write the report as JSON.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = InputFormat::Map)]
        format: InputFormat,
        /// Accepted for symmetry with the other commands; fitting draws no
        /// random numbers.
        #[arg(long)]
        seed: Option<u64>,
    },
}
