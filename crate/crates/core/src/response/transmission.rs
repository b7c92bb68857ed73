use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ModeResponse;

/// Whether the resonances appear as transmission maxima or as notches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceSign {
    /// `S21 = Σ poles`
    #[default]
    Peak,
    /// `S21 = 1 − Σ poles`
    Dip,
}

/// Power below which `|S21|²` is clamped before conversion to dB.
pub const POWER_FLOOR: f64 = 1e-30;

/// Single-pole response `amplitude · (fwhm/2) / (i·(f − f_center) + fwhm/2)`.
pub fn pole(mode: &ModeResponse, f: f64) -> Complex64 {
    let half = 0.5 * mode.fwhm;
    mode.amplitude * half / Complex64::new(half, f - mode.f_center)
}

/// Coherent sum of the mode poles at one frequency.
pub fn s21_at(modes: &[ModeResponse], f: f64, sign: TraceSign) -> Complex64 {
    let sum: Complex64 = modes.iter().map(|m| pole(m, f)).sum();
    match sign {
        TraceSign::Peak => sum,
        TraceSign::Dip => Complex64::new(1.0, 0.0) - sum,
    }
}

/// Complex transmission sampled on `f_axis` (same frame as the mode centers).
pub fn s21_trace(modes: &[ModeResponse], f_axis: &[f64], sign: TraceSign) -> Vec<Complex64> {
    f_axis.iter().map(|&f| s21_at(modes, f, sign)).collect()
}

/// `10·log10(|s|²)`, clamped at [`POWER_FLOOR`].
pub fn power_db(s: Complex64) -> f64 {
    10.0 * s.norm_sqr().max(POWER_FLOOR).log10()
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
