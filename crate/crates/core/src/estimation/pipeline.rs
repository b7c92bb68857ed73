use rayon::prelude::*;

use super::crossing::{fit_avoided_crossing, Branches};
use super::lm::LmOptions;
use super::lorentz::{fit_lorentzian_pair, PairFit, PairFitOptions, PairInit};
use super::peaks::{find_peaks, smooth_db, Extremum, Peak, PeakOptions};
use super::report::FitReport;
use super::FitError;
use crate::response::{db_to_power, TraceSign, TransmissionMap};

pub const MIN_USABLE_ROWS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapFitOptions {
    pub lm: LmOptions,
    pub sign: TraceSign,
    pub min_prominence_db: f64,
    /// Moving-average width (linear power) applied before peak detection
    /// only; the Lorentzian fits see the raw rows.
    pub smooth_bins: usize,
}

impl Default for MapFitOptions {
    fn default() -> Self {
        Self {
            lm: LmOptions::default(),
            sign: TraceSign::Peak,
            min_prominence_db: 10.0,
            smooth_bins: 9,
        }
    }
}

impl MapFitOptions {
    fn peak_options(&self) -> PeakOptions {
        PeakOptions {
            min_prominence_db: self.min_prominence_db,
            extremum: match self.sign {
                TraceSign::Peak => Extremum::Peak,
                TraceSign::Dip => Extremum::Dip,
            },
        }
    }

    fn pair_options(&self) -> PairFitOptions {
        PairFitOptions {
            lm: self.lm,
            sign: self.sign,
            peaks: self.peak_options(),
        }
    }

    fn init_from(&self, peaks: &[Peak]) -> PairInit {
        let amp = |h: f64| match self.sign {
            TraceSign::Peak => db_to_power(h).sqrt(),
            TraceSign::Dip => 1.0 - db_to_power(h).sqrt(),
        };
        PairInit {
            centers: [peaks[0].f, peaks[1].f],
            fwhm: [peaks[0].width_estimate, peaks[1].width_estimate],
            amplitudes: [amp(peaks[0].height_db), amp(peaks[1].height_db)],
        }
    }

    fn detect(&self, f: &[f64], row: &[f64]) -> Vec<Peak> {
        find_peaks(f, &smooth_db(row, self.smooth_bins), &self.peak_options())
    }
}

/// Pair fit of one map row, or `None` when the row does not show exactly two
/// extrema or the fit does not settle inside the frequency window.
fn fit_row(f: &[f64], row: &[f64], options: &MapFitOptions) -> Option<PairFit> {
    let peaks = options.detect(f, row);
    if peaks.len() != 2 {
        return None;
    }
    let fit = fit_lorentzian_pair(f, row, Some(options.init_from(&peaks)), &options.pair_options()).ok()?;
    let inside = |c: f64| c > f[0] && c < f[f.len() - 1];
    (inside(fit.centers[0]) && inside(fit.centers[1])).then_some(fit)
}

fn hwhm_with_sigma(fit: &PairFit) -> (f64, f64) {
    let c = &fit.covariance;
    let var = (c[2][2] + c[3][3] + 2.0 * c[2][3]).max(0.0);
    (fit.mean_hwhm(), 0.25 * var.sqrt())
}

/// Peaks → per-row pair fits → branches → hyperbola, with `delta` taken from
/// the row closest to the fitted crossing. `f_ref` is the absolute frequency
/// of zero detuning.
pub fn fit_map(map: &TransmissionMap, f_ref: f64, options: &MapFitOptions) -> Result<FitReport, FitError> {
    map.validate()?;
    let f = &map.f_axis;
    let rows: Vec<Option<PairFit>> = (0..map.n_rows())
        .into_par_iter()
        .map(|i| fit_row(f, map.row(i), options))
        .collect();

    let mut branches = Branches::default();
    let mut fits = Vec::new();
    for (b, fit) in map.b_axis.iter().zip(rows) {
        if let Some(fit) = fit {
            branches.push(*b, fit.centers[1], fit.centers[0]);
            fits.push(fit);
        }
    }
    let used = fits.len();
    if used < MIN_USABLE_ROWS {
        return Err(FitError::TooFewUsableRows {
            usable: used,
            required: MIN_USABLE_ROWS,
        });
    }
    let crossing = fit_avoided_crossing(&branches, None, &options.lm)?;
    let nearest = branches
        .b
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - crossing.b0).abs().total_cmp(&(b.1 - crossing.b0).abs()))
        .map(|(i, _)| i)
        .expect("at least four rows");
    let mut report = crossing.report(f_ref, Some(hwhm_with_sigma(&fits[nearest])), used);
    report.n_rows_excluded = map.n_rows() - used;
    Ok(report)
}

/// Pair fit of a single trace: `g` is half the fitted splitting.
pub fn fit_trace(f: &[f64], s21_db: &[f64], f_ref: f64, options: &MapFitOptions) -> Result<FitReport, FitError> {
    if f.len() != s21_db.len() || f.len() < 3 {
        return Err(FitError::InvalidInput("trace axes must match and hold at least 3 points"));
    }
    let mut peaks = options.detect(f, s21_db);
    if peaks.len() < 2 {
        return Err(FitError::NotEnoughPeaks { found: peaks.len() });
    }
    peaks.sort_by(|a, b| b.prominence_db.total_cmp(&a.prominence_db));
    peaks.truncate(2);
    peaks.sort_by(|a, b| a.f.total_cmp(&b.f));
    let fit = fit_lorentzian_pair(f, s21_db, Some(options.init_from(&peaks)), &options.pair_options())?;
    let c = &fit.covariance;
    let g_var = (c[0][0] + c[1][1] - 2.0 * c[0][1]).max(0.0);
    let fc_var = (c[0][0] + c[1][1] + 2.0 * c[0][1]).max(0.0);
    let g = 0.5 * fit.splitting();
    let (delta, delta_sigma) = hwhm_with_sigma(&fit);
    Ok(FitReport {
        g_hz: g,
        g_sigma_hz: 0.5 * g_var.sqrt(),
        delta_hz: Some(delta),
        delta_sigma_hz: Some(delta_sigma),
        b0_t: None,
        b0_sigma_t: None,
        slope_hz_per_t: None,
        slope_sigma_hz_per_t: None,
        f_c_hz: f_ref + 0.5 * (fit.centers[0] + fit.centers[1]),
        f_c_sigma_hz: 0.5 * fc_var.sqrt(),
        ratio_g_delta: Some(g / delta),
        covariance_params: [
            "f_lower_hz",
            "f_upper_hz",
            "fwhm_lower_hz",
            "fwhm_upper_hz",
            "amplitude_lower",
            "amplitude_upper",
            "relative_phase_rad",
            "floor",
        ]
        .map(String::from)
        .to_vec(),
        covariance: fit.covariance.clone(),
        residual_rms: fit.residual_rms,
        iterations: fit.diagnostics.iterations,
        converged: fit.diagnostics.converged,
        n_rows_used: 1,
        n_rows_excluded: 0,
        error: None,
    })
}
