//! Hyperbola fit of the two dressed branches across the avoided crossing:
//! `f± = c ± sqrt(g² + slope²·(b − b0)²)`.
//!
//! Internally the field is mapped onto `[-1, 1]` and the branch frequencies
//! are taken relative to their mean, which keeps the normal matrix well scaled.

use super::lm::{lm_minimize, LmDiagnostics, LmOptions};
use super::report::FitReport;
use super::FitError;

/// Upper and lower branch frequencies per field point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Branches {
    pub b: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl Branches {
    pub fn push(&mut self, b: f64, upper: f64, lower: f64) {
        self.b.push(b);
        self.upper.push(upper);
        self.lower.push(lower);
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingInit {
    pub center: f64,
    pub g: f64,
    pub b0: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingFit {
    pub center: f64,
    pub g: f64,
    pub b0: f64,
    pub slope: f64,
    /// Parameter order: center, g, b0, slope (SI units).
    pub covariance: Vec<Vec<f64>>,
    pub residual_rms: f64,
    pub diagnostics: LmDiagnostics,
}

impl CrossingFit {
    /// `(f+ − c)·(f− − c)`, which peaks at `−g²` when `b = b0`.
    pub fn product_at(&self, b: f64) -> f64 {
        let d = self.slope * (b - self.b0);
        -(self.g * self.g + d * d)
    }

    pub fn branches_at(&self, b: f64) -> (f64, f64) {
        let h = (-self.product_at(b)).sqrt();
        (self.center + h, self.center - h)
    }

    pub fn std_error(&self, param: usize) -> f64 {
        self.covariance[param][param].max(0.0).sqrt()
    }

    /// Report with `f_ref` added back to the centre and, when given, the
    /// half-linewidth `(delta, sigma)` from a trace fit.
    pub fn report(&self, f_ref: f64, delta: Option<(f64, f64)>, n_rows_used: usize) -> FitReport {
        FitReport {
            g_hz: self.g,
            g_sigma_hz: self.std_error(1),
            delta_hz: delta.map(|d| d.0),
            delta_sigma_hz: delta.map(|d| d.1),
            b0_t: Some(self.b0),
            b0_sigma_t: Some(self.std_error(2)),
            slope_hz_per_t: Some(self.slope),
            slope_sigma_hz_per_t: Some(self.std_error(3)),
            f_c_hz: f_ref + self.center,
            f_c_sigma_hz: self.std_error(0),
            ratio_g_delta: delta.map(|d| self.g / d.0),
            covariance_params: ["f_c_hz", "g_hz", "b0_t", "slope_hz_per_t"]
                .map(String::from)
                .to_vec(),
            covariance: self.covariance.clone(),
            residual_rms: self.residual_rms,
            iterations: self.diagnostics.iterations,
            converged: self.diagnostics.converged,
            n_rows_used,
            n_rows_excluded: 0,
            error: None,
        }
    }
}

fn validate(br: &Branches) -> Result<(), FitError> {
    let n = br.b.len();
    if br.upper.len() != n || br.lower.len() != n {
        return Err(FitError::InvalidInput("branch arrays differ in length"));
    }
    if n < 4 {
        return Err(FitError::InvalidInput("need at least 4 field points"));
    }
    if !br.b.iter().chain(&br.upper).chain(&br.lower).all(|v| v.is_finite()) {
        return Err(FitError::InvalidInput("non-finite branch data"));
    }
    if br.upper.iter().zip(&br.lower).any(|(u, l)| u <= l) {
        return Err(FitError::InvalidInput("upper branch must lie above the lower one"));
    }
    Ok(())
}

/// Deterministic warm start: gap minimum, its half-width, mean centre and
/// the secant slope of the outermost rows. `b` must be sorted.
fn default_init(b: &[f64], upper: &[f64], lower: &[f64]) -> Result<CrossingInit, FitError> {
    let n = b.len();
    let sep: Vec<f64> = upper.iter().zip(lower).map(|(u, l)| u - l).collect();
    let (imin, &smin) = sep
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let smax = sep.iter().cloned().fold(f64::MIN, f64::max);
    if smax - smin <= 1e-12 * smax {
        return Err(FitError::InsufficientSpan("branch separation does not vary with field"));
    }
    if imin == 0 || imin == n - 1 {
        return Err(FitError::InsufficientSpan(
            "all points lie on one side of the gap minimum",
        ));
    }
    let g = 0.5 * smin;
    let b0 = b[imin];
    let secant = |i: usize| {
        let h = 0.5 * sep[i];
        (h * h - g * g).max(0.0).sqrt() / (b[i] - b0).abs()
    };
    let slope = 0.5 * (secant(0) + secant(n - 1));
    let center = upper.iter().zip(lower).map(|(u, l)| 0.5 * (u + l)).sum::<f64>() / n as f64;
    Ok(CrossingInit { center, g, b0, slope })
}

pub fn fit_avoided_crossing(
    branches: &Branches,
    init: Option<CrossingInit>,
    lm: &LmOptions,
) -> Result<CrossingFit, FitError> {
    validate(branches)?;
    let mut idx: Vec<usize> = (0..branches.len()).collect();
    idx.sort_by(|&i, &j| branches.b[i].total_cmp(&branches.b[j]));
    let b: Vec<f64> = idx.iter().map(|&i| branches.b[i]).collect();
    let upper: Vec<f64> = idx.iter().map(|&i| branches.upper[i]).collect();
    let lower: Vec<f64> = idx.iter().map(|&i| branches.lower[i]).collect();
    if b.windows(2).any(|w| w[1] == w[0]) {
        return Err(FitError::InvalidInput("repeated field value"));
    }

    let init = match init {
        Some(i) => i,
        None => default_init(&b, &upper, &lower)?,
    };
    let (b_lo, b_hi) = (b[0], b[b.len() - 1]);
    let b_mid = 0.5 * (b_lo + b_hi);
    let b_half = 0.5 * (b_hi - b_lo);
    let f_ref = init.center;
    let u: Vec<f64> = b.iter().map(|x| (x - b_mid) / b_half).collect();
    let up: Vec<f64> = upper.iter().map(|f| f - f_ref).collect();
    let low: Vec<f64> = lower.iter().map(|f| f - f_ref).collect();

    let residuals = |p: &[f64]| -> Vec<f64> {
        let mut r = Vec::with_capacity(2 * u.len());
        for i in 0..u.len() {
            let d = p[3] * (u[i] - p[2]);
            let h = (p[1] * p[1] + d * d).sqrt();
            r.push(p[0] + h - up[i]);
            r.push(p[0] - h - low[i]);
        }
        r
    };
    let p0 = [
        0.0,
        init.g,
        (init.b0 - b_mid) / b_half,
        init.slope * b_half,
    ];
    let res = lm_minimize(residuals, &p0, lm)?;
    if !res.diagnostics.converged {
        return Err(FitError::ConvergenceFailure {
            diagnostics: res.diagnostics,
        });
    }
    let p = &res.params;
    let b0 = b_mid + p[2] * b_half;
    if !(b0 > b_lo && b0 < b_hi) {
        return Err(FitError::InsufficientSpan("fitted crossing lies outside the data"));
    }
    let scale = [1.0, p[1].signum(), b_half, p[3].signum() / b_half];
    let covariance = (0..4)
        .map(|i| (0..4).map(|j| scale[i] * scale[j] * res.covariance[i][j]).collect())
        .collect();
    Ok(CrossingFit {
        center: f_ref + p[0],
        g: p[1].abs(),
        b0,
        slope: p[3].abs() / b_half,
        covariance,
        residual_rms: res.residual_rms(),
        diagnostics: res.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::linspace;

    const F_C: f64 = 11.77355e9;
    const G: f64 = 3230.0;
    const B0: f64 = -5e-4;

    fn generate(b: &[f64], center: f64, slope: f64) -> Branches {
        let mut br = Branches::default();
        for &x in b {
            let h = (G * G + (slope * (x - B0)).powi(2)).sqrt();
            br.push(x, center + h, center - h);
        }
        br
    }

    #[test]
    fn noiseless_recovery() {
        for slope in [2e7, 3.3e6, 1.5e8] {
            let br = generate(&linspace(-1.5e-3, 0.5e-3, 41), 0.0, slope);
            let fit = fit_avoided_crossing(&br, None, &LmOptions::default()).unwrap();
            let rep = fit.report(F_C, None, br.len());
            assert!((fit.g / G - 1.0).abs() < 1e-9, "{}", fit.g);
            assert!((fit.b0 / B0 - 1.0).abs() < 1e-9);
            assert!((fit.slope / slope - 1.0).abs() < 1e-9);
            assert!((rep.f_c_hz / F_C - 1.0).abs() < 1e-15);
            assert!(rep.ratio_g_delta.is_none());
        }
    }

    #[test]
    fn ratio_filled_when_delta_given() {
        let br = generate(&linspace(-1.5e-3, 0.5e-3, 21), 0.0, 2e7);
        let fit = fit_avoided_crossing(&br, None, &LmOptions::default()).unwrap();
        let rep = fit.report(F_C, Some((603.0, 1.0)), 21);
        assert!((rep.ratio_g_delta.unwrap() - G / 603.0).abs() < 1e-9);
    }

    #[test]
    fn flat_branches_are_unidentifiable() {
        let br = generate(&linspace(-1.5e-3, 0.5e-3, 21), 0.0, 0.0);
        assert!(matches!(
            fit_avoided_crossing(&br, None, &LmOptions::default()),
            Err(FitError::InsufficientSpan(_))
        ));
    }

    #[test]
    fn one_sided_data_is_rejected() {
        let br = generate(&linspace(-4e-4, 0.5e-3, 21), 0.0, 2e7);
        assert!(matches!(
            fit_avoided_crossing(&br, None, &LmOptions::default()),
            Err(FitError::InsufficientSpan(_))
        ));
    }

    #[test]
    fn too_few_points() {
        let br = generate(&[-1e-3, -5e-4, 0.0], 0.0, 2e7);
        assert!(matches!(
            fit_avoided_crossing(&br, None, &LmOptions::default()),
            Err(FitError::InvalidInput(_))
        ));
    }

    #[test]
    fn translation_invariance() {
        let b = linspace(-1.5e-3, 0.5e-3, 31);
        let mut br = generate(&b, 0.0, 2e7);
        // Deterministic perturbation so the optimum has a non-zero residual.
        for i in 0..br.len() {
            br.upper[i] += 5.0 * ((i * 7 % 11) as f64 - 5.0);
            br.lower[i] -= 3.0 * ((i * 5 % 7) as f64 - 3.0);
        }
        let base = fit_avoided_crossing(&br, None, &LmOptions::default()).unwrap();
        let shift = 4321.0;
        let mut moved = br.clone();
        moved.upper.iter_mut().chain(moved.lower.iter_mut()).for_each(|f| *f += shift);
        let m = fit_avoided_crossing(&moved, None, &LmOptions::default()).unwrap();
        assert!((m.g / base.g - 1.0).abs() < 1e-9);
        assert!((m.slope / base.slope - 1.0).abs() < 1e-9);
        assert!((m.b0 / base.b0 - 1.0).abs() < 1e-9);
        assert!((m.center - shift - base.center).abs() < 1e-9 * base.g);
    }

    #[test]
    fn product_identity() {
        let b = linspace(-1.5e-3, 0.5e-3, 41);
        let br = generate(&b, 100.0, 2e7);
        let fit = fit_avoided_crossing(&br, None, &LmOptions::default()).unwrap();
        for (i, &bi) in b.iter().enumerate() {
            let prod = (br.upper[i] - fit.center) * (br.lower[i] - fit.center);
            assert!((prod / fit.product_at(bi) - 1.0).abs() < 1e-8);
            assert!(fit.product_at(bi) <= -fit.g * fit.g);
        }
        assert_eq!(fit.product_at(fit.b0), -fit.g * fit.g);
    }
}
