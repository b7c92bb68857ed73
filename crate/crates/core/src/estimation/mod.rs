//! Parameter recovery from traces and maps.
//!
//! The pipeline is peaks → per-row Lorentzian pairs → branches → hyperbola.
//! All fits work in detuning coordinates; reports add the reference back.

mod crossing;
mod lm;
mod lorentz;
mod peaks;
mod pipeline;
mod report;

use thiserror::Error;

use crate::response::ResponseError;

pub use crossing::{fit_avoided_crossing, Branches, CrossingFit, CrossingInit};
pub use lm::{lm_minimize, LmDiagnostics, LmOptions, LmResult, Termination};
pub use lorentz::{fit_lorentzian_pair, PairFit, PairFitOptions, PairInit};
pub use peaks::{find_peaks, smooth_db, Extremum, Peak, PeakOptions};
pub use pipeline::{fit_map, fit_trace, MapFitOptions};
pub use report::FitReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("residuals are not finite at the initial parameters")]
    NonFiniteResidual,
    #[error("normal matrix is singular in parameter {index}")]
    SingularNormalMatrix { index: usize },
    #[error("fit did not converge after {} iterations ({:?})", .diagnostics.iterations, .diagnostics.termination)]
    ConvergenceFailure { diagnostics: LmDiagnostics },
    #[error("initial centers {0} Hz and {1} Hz coincide within one grid step")]
    DegenerateInit(f64, f64),
    #[error("need two peaks to initialise a pair fit, found {found}")]
    NotEnoughPeaks { found: usize },
    #[error("insufficient field span: {0}")]
    InsufficientSpan(&'static str),
    #[error("invalid fit input: {0}")]
    InvalidInput(&'static str),
    #[error("only {usable} rows show exactly two peaks, need at least {required}")]
    TooFewUsableRows { usable: usize, required: usize },
    #[error(transparent)]
    Response(#[from] ResponseError),
}
