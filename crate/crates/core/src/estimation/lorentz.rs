//! Two-pole fit of a single transmission trace.
//!
//! The model is the coherent pole sum of the response module plus an
//! additive power floor for the noise:
//! `|S|² + floor` with `S = a_u·P_u + a_l·e^{iφ}·P_l` (or `1 − …` for dips).
//! Fitting is done on linear power.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::lm::{lm_minimize, LmDiagnostics, LmOptions};
use super::peaks::{find_peaks, Extremum, PeakOptions};
use super::FitError;
use crate::response::{db_to_power, ModeResponse, TraceSign};

/// Starting point for a pair fit, in the trace's frequency frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairInit {
    pub centers: [f64; 2],
    pub fwhm: [f64; 2],
    pub amplitudes: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFitOptions {
    pub lm: LmOptions,
    pub sign: TraceSign,
    /// Used when no explicit init is given.
    pub peaks: PeakOptions,
}

impl Default for PairFitOptions {
    fn default() -> Self {
        Self {
            lm: LmOptions::default(),
            sign: TraceSign::Peak,
            peaks: PeakOptions::default(),
        }
    }
}

impl PairFitOptions {
    pub fn with_sign(sign: TraceSign) -> Self {
        let extremum = match sign {
            TraceSign::Peak => Extremum::Peak,
            TraceSign::Dip => Extremum::Dip,
        };
        Self {
            sign,
            peaks: PeakOptions {
                extremum,
                ..PeakOptions::default()
            },
            ..Self::default()
        }
    }
}

/// Result of [`fit_lorentzian_pair`]. Index 0 is the lower mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFit {
    pub centers: [f64; 2],
    pub fwhm: [f64; 2],
    pub amplitudes: [Complex64; 2],
    /// Additive power floor.
    pub background: f64,
    /// Parameter order: lower center, upper center, lower FWHM, upper FWHM,
    /// lower amplitude, upper amplitude, relative phase, floor.
    pub covariance: Vec<Vec<f64>>,
    /// RMS residual in linear power.
    pub residual_rms: f64,
    pub diagnostics: LmDiagnostics,
}

impl PairFit {
    /// Upper mode first, shifted by `offset` into the absolute frame.
    pub fn modes(&self, offset: f64) -> [ModeResponse; 2] {
        let m = |i: usize| ModeResponse {
            f_center: self.centers[i] + offset,
            fwhm: self.fwhm[i],
            amplitude: self.amplitudes[i],
        };
        [m(1), m(0)]
    }

    pub fn splitting(&self) -> f64 {
        self.centers[1] - self.centers[0]
    }

    pub fn mean_hwhm(&self) -> f64 {
        0.25 * (self.fwhm[0] + self.fwhm[1])
    }

    pub fn std_error(&self, param: usize) -> f64 {
        self.covariance[param][param].max(0.0).sqrt()
    }
}

fn pole(center: f64, fwhm: f64, f: f64) -> Complex64 {
    let half = 0.5 * fwhm.abs();
    Complex64::new(half, 0.0) / Complex64::new(half, f - center)
}

fn model_power(p: &[f64], f: f64, sign: TraceSign) -> f64 {
    let s = p[4] * Complex64::from_polar(1.0, p[6]) * pole(p[0], p[2], f)
        + p[5] * pole(p[1], p[3], f);
    let s = match sign {
        TraceSign::Peak => s,
        TraceSign::Dip => Complex64::new(1.0, 0.0) - s,
    };
    s.norm_sqr() + p[7]
}

fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

fn init_from_peaks(f: &[f64], s21_db: &[f64], options: &PairFitOptions) -> Result<PairInit, FitError> {
    let mut peaks = find_peaks(f, s21_db, &options.peaks);
    if peaks.len() < 2 {
        return Err(FitError::NotEnoughPeaks { found: peaks.len() });
    }
    peaks.sort_by(|a, b| b.prominence_db.total_cmp(&a.prominence_db));
    peaks.truncate(2);
    peaks.sort_by(|a, b| a.f.total_cmp(&b.f));
    let amp = |h: f64| match options.sign {
        TraceSign::Peak => db_to_power(h).sqrt(),
        TraceSign::Dip => 1.0 - db_to_power(h).sqrt(),
    };
    Ok(PairInit {
        centers: [peaks[0].f, peaks[1].f],
        fwhm: [peaks[0].width_estimate, peaks[1].width_estimate],
        amplitudes: [amp(peaks[0].height_db), amp(peaks[1].height_db)],
    })
}

/// Fits two Lorentzian poles to a dB trace.
///
/// Without `init`, the two most prominent extrema seed the fit.
pub fn fit_lorentzian_pair(
    f: &[f64],
    s21_db: &[f64],
    init: Option<PairInit>,
    options: &PairFitOptions,
) -> Result<PairFit, FitError> {
    if f.len() != s21_db.len() || f.len() < 9 {
        return Err(FitError::InvalidInput("trace axes must match and hold at least 9 points"));
    }
    if !f.windows(2).all(|w| w[1] > w[0]) || !s21_db.iter().chain(f).all(|v| v.is_finite()) {
        return Err(FitError::InvalidInput("trace must be finite with increasing frequency"));
    }
    let init = match init {
        Some(i) => i,
        None => init_from_peaks(f, s21_db, options)?,
    };
    let step = (f[f.len() - 1] - f[0]) / (f.len() - 1) as f64;
    let (lo, hi) = if init.centers[0] <= init.centers[1] { (0, 1) } else { (1, 0) };
    if init.centers[hi] - init.centers[lo] <= step {
        return Err(FitError::DegenerateInit(init.centers[lo], init.centers[hi]));
    }

    let power: Vec<f64> = s21_db.iter().map(|&v| db_to_power(v)).collect();
    let sign = options.sign;
    let residuals = |p: &[f64]| -> Vec<f64> {
        f.iter()
            .zip(&power)
            .map(|(&x, &y)| model_power(p, x, sign) - y)
            .collect()
    };
    let p0 = [
        init.centers[lo],
        init.centers[hi],
        init.fwhm[lo],
        init.fwhm[hi],
        init.amplitudes[lo],
        init.amplitudes[hi],
        0.0,
        0.0,
    ];
    let res = lm_minimize(residuals, &p0, &options.lm)?;
    if !res.diagnostics.converged {
        return Err(FitError::ConvergenceFailure {
            diagnostics: res.diagnostics,
        });
    }
    let residual_rms = res.residual_rms();
    let mut p = res.params;
    let cov = res.covariance;

    // Reflect each parameter into its canonical range; the model is even
    // in the widths, and for peaks a sign flip of an amplitude is a phase of π.
    let mut flip = [1.0; 8];
    for j in [2, 3] {
        if p[j] < 0.0 {
            p[j] = -p[j];
            flip[j] = -1.0;
        }
    }
    if sign == TraceSign::Peak {
        if p[5] < 0.0 {
            p[5] = -p[5];
            p[6] += PI;
            flip[5] = -1.0;
        }
        if p[4] < 0.0 {
            p[4] = -p[4];
            p[6] += PI;
            flip[4] = -1.0;
        }
    }
    let mut amplitudes = [
        p[4] * Complex64::from_polar(1.0, p[6]),
        Complex64::new(p[5], 0.0),
    ];
    let mut order = [0, 1, 2, 3, 4, 5, 6, 7];
    if p[0] > p[1] {
        order = [1, 0, 3, 2, 5, 4, 6, 7];
        amplitudes.swap(0, 1);
        if sign == TraceSign::Peak {
            // Move the relative phase back onto the (new) lower mode.
            let rot = amplitudes[1].conj() / amplitudes[1].norm();
            amplitudes = [amplitudes[0] * rot, amplitudes[1] * rot];
            p[6] = -p[6];
            flip[6] = -flip[6];
        }
    }
    let cov = (0..8)
        .map(|i| {
            (0..8)
                .map(|j| flip[order[i]] * flip[order[j]] * cov[order[i]][order[j]])
                .collect()
        })
        .collect();
    if sign == TraceSign::Peak {
        amplitudes[0] = Complex64::from_polar(amplitudes[0].norm(), wrap_phase(amplitudes[0].arg()));
        amplitudes[1] = Complex64::new(amplitudes[1].norm(), 0.0);
    }
    let pick = |a: usize, b: usize| [p[order[a]], p[order[b]]];
    Ok(PairFit {
        centers: pick(0, 1),
        fwhm: pick(2, 3),
        amplitudes,
        background: p[7],
        covariance: cov,
        residual_rms,
        diagnostics: res.diagnostics,
    })
}
