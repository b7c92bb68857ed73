//! Observable response of the cavity: dressed and bare mode frequencies,
//! linewidths with the spin-loss partition, S21 traces and transmission maps.

mod csv_io;
mod map;
mod transmission;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doublet::{
    bloch_coefficients, diagonalize, BlochCoefficients, Circular, DoubletError, DoubletSolution,
    Handedness, ModeFamily,
};
use crate::medium::{permeability_perturbation, MediumError, MediumModel};

pub use csv_io::{
    format_sig9, read_map_csv, read_sweep_csv, write_map_csv, write_sweep_csv, CsvError,
    SweepRecord,
};
pub use map::{linspace, synthesize_map, trace_at_field, NoiseSpec, TransmissionMap};
pub use transmission::{db_to_power, pole, power_db, s21_at, s21_trace, TraceSign, POWER_FLOOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResponseError {
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Doublet(#[from] DoubletError),
    #[error("invalid cavity: {0}")]
    InvalidCavity(&'static str),
    #[error("invalid axis: {0}")]
    InvalidAxis(&'static str),
    #[error("invalid noise specification: {0}")]
    InvalidNoise(&'static str),
}

/// Port coupling of the two dressed modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortModel {
    pub amplitude_plus: f64,
    pub amplitude_minus: f64,
    /// Phase of the lower mode relative to the upper one.
    #[serde(default)]
    pub relative_phase_rad: f64,
}

impl Default for PortModel {
    fn default() -> Self {
        Self {
            amplitude_plus: 1.0,
            amplitude_minus: 1.0,
            relative_phase_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cavity {
    /// Bare mode frequency, also the probe frequency for the ESR lines.
    #[serde(rename = "f_c_hz")]
    pub f_c: f64,
    /// Intrinsic half-width at half-maximum of each mode.
    #[serde(rename = "delta0_hz")]
    pub delta0: f64,
    #[serde(default)]
    pub family: ModeFamily,
    #[serde(default)]
    pub sign: TraceSign,
    /// Circular polarization that co-rotates with the spins and so carries
    /// the ESR absorption.
    #[serde(default = "default_corotating")]
    pub corotating: Circular,
    #[serde(default)]
    pub handedness: Handedness,
    #[serde(default)]
    pub port: PortModel,
}

fn default_corotating() -> Circular {
    Circular::R
}

impl Cavity {
    pub fn new(f_c: f64, delta0: f64, family: ModeFamily) -> Self {
        Self {
            f_c,
            delta0,
            family,
            sign: TraceSign::Peak,
            corotating: Circular::R,
            handedness: Handedness::Standard,
            port: PortModel::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ResponseError> {
        if !(self.f_c.is_finite() && self.f_c > 0.0) {
            return Err(ResponseError::InvalidCavity("f_c must be positive"));
        }
        if !(self.delta0.is_finite() && self.delta0 > 0.0) {
            return Err(ResponseError::InvalidCavity("delta0 must be positive"));
        }
        let p = &self.port;
        if ![p.amplitude_plus, p.amplitude_minus, p.relative_phase_rad]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(ResponseError::InvalidCavity("non-finite port parameter"));
        }
        Ok(())
    }
}

/// One resonance as seen at the port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeResponse {
    pub f_center: f64,
    pub fwhm: f64,
    pub amplitude: Complex64,
}

impl ModeResponse {
    /// Half-width at half-maximum.
    pub fn hwhm(&self) -> f64 {
        0.5 * self.fwhm
    }

    pub fn q_factor(&self) -> f64 {
        self.f_center / self.fwhm
    }
}

/// Everything computed at a single applied field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub b: f64,
    pub bloch: BlochCoefficients,
    pub doublet: DoubletSolution,
    pub plus: ModeResponse,
    pub minus: ModeResponse,
    pub f_bare_up: f64,
    pub f_bare_low: f64,
    /// Spin-loss FWHM scale `2·f_c·|coupling|·Σ Im χ`.
    pub spin_loss: f64,
    /// Weights of the co-rotating polarization in the upper and lower modes.
    pub loss_weights: (f64, f64),
}

impl FieldPoint {
    pub fn modes(&self) -> [ModeResponse; 2] {
        [self.plus, self.minus]
    }

    /// `2·f_c·|az|`, taken from the Bloch vector rather than by subtracting
    /// the two absolute bare frequencies.
    pub fn bare_separation(&self) -> f64 {
        2.0 * self.bloch.omega0 * self.bloch.az.abs()
    }
}

/// Bloch coefficients of the tuned medium at field `b`, plus the spin loss.
fn tuned_bloch(
    medium: &MediumModel,
    cavity: &Cavity,
    b: f64,
) -> Result<(BlochCoefficients, f64), ResponseError> {
    cavity.validate()?;
    let perm = permeability_perturbation(medium, b, cavity.f_c)?;
    let bloch = bloch_coefficients(&medium.eta, &perm.nu, cavity.family, cavity.f_c)?;
    let spin_loss = 2.0 * cavity.f_c * medium.coupling.abs() * perm.absorption;
    Ok((bloch, spin_loss))
}

/// Dressed doublet, linewidths and bare lines at one applied field.
pub fn solve_at_field(
    medium: &MediumModel,
    cavity: &Cavity,
    b: f64,
) -> Result<FieldPoint, ResponseError> {
    let (bloch, spin_loss) = tuned_bloch(medium, cavity, b)?;
    let doublet = diagonalize(&bloch);
    let lossy = cavity.corotating.under(cavity.handedness);
    let w_plus = doublet.state_plus.weight(lossy);
    let w_minus = doublet.state_minus.weight(lossy);
    let port = &cavity.port;
    let plus = ModeResponse {
        f_center: doublet.f_plus,
        fwhm: 2.0 * cavity.delta0 + spin_loss * w_plus,
        amplitude: Complex64::new(port.amplitude_plus, 0.0),
    };
    let minus = ModeResponse {
        f_center: doublet.f_minus,
        fwhm: 2.0 * cavity.delta0 + spin_loss * w_minus,
        amplitude: Complex64::from_polar(port.amplitude_minus, port.relative_phase_rad),
    };
    let (f_bare_up, f_bare_low) = bare_from(&bloch);
    Ok(FieldPoint {
        b,
        bloch,
        doublet,
        plus,
        minus,
        f_bare_up,
        f_bare_low,
        spin_loss,
        loss_weights: (w_plus, w_minus),
    })
}

fn bare_from(b: &BlochCoefficients) -> (f64, f64) {
    let az = b.az.abs();
    (b.omega0 * (b.a0 + az), b.omega0 * (b.a0 - az))
}

/// Eigenfrequencies with the R↔L coupling switched off: `f_c·(a0 ± |az|)`.
pub fn bare_lines(
    medium: &MediumModel,
    cavity: &Cavity,
    b: f64,
) -> Result<(f64, f64), ResponseError> {
    let (bloch, _) = tuned_bloch(medium, cavity, b)?;
    Ok(bare_from(&bloch))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<FieldPoint>,
}

impl SweepResult {
    pub fn b_points(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.b).collect()
    }

    pub fn records(&self) -> Vec<SweepRecord> {
        self.points.iter().map(SweepRecord::from).collect()
    }
}

/// [`solve_at_field`] over a strictly increasing list of fields.
pub fn sweep(
    medium: &MediumModel,
    cavity: &Cavity,
    b_points: &[f64],
) -> Result<SweepResult, ResponseError> {
    check_axis(b_points, "field axis must be non-empty, finite and strictly increasing")?;
    let points = b_points
        .iter()
        .map(|&b| solve_at_field(medium, cavity, b))
        .collect::<Result<_, _>>()?;
    Ok(SweepResult { points })
}

pub(crate) fn check_axis(axis: &[f64], msg: &'static str) -> Result<(), ResponseError> {
    let ok = !axis.is_empty()
        && axis.iter().all(|v| v.is_finite())
        && axis.windows(2).all(|w| w[1] > w[0]);
    if ok {
        Ok(())
    } else {
        Err(ResponseError::InvalidAxis(msg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{validate_perturbation, EsrLine, PerturbationTensor};

    const F_C: f64 = 11.77355e9;

    fn medium(transverse: f64, with_line: bool) -> MediumModel {
        let eta = validate_perturbation(0.0, Complex64::new(transverse, 0.0)).unwrap();
        let lines = if with_line {
            vec![EsrLine {
                f0: 12.04e9,
                slope: 2.8e8,
                gamma: 2.0e5,
                chi0: 4.0,
                label: "Fe3+ dipole".into(),
            }]
        } else {
            vec![]
        };
        MediumModel::new(10.0, 1.0, eta, PerturbationTensor::ZERO, lines, 1.0).unwrap()
    }

    /// Static offset that puts the crossing at `b0`.
    fn crossing_medium(b0: f64) -> MediumModel {
        let mut m = medium(3.88e-7, true);
        let chi = m.total_susceptibility(b0, F_C);
        m.nu_static = validate_perturbation(-chi.re, Complex64::new(0.0, 0.0)).unwrap();
        m
    }

    #[test]
    fn equal_widths_at_crossing() {
        let m = crossing_medium(-5e-4);
        let p = solve_at_field(&m, &Cavity::new(F_C, 603.0, ModeFamily::Wgh), -5e-4).unwrap();
        assert!(p.bloch.az.abs() < 1e-12);
        assert!(p.spin_loss > 0.0);
        assert!((p.plus.fwhm - p.minus.fwhm).abs() < 1e-9 * p.plus.fwhm);
    }

    #[test]
    fn no_lines_means_intrinsic_widths() {
        let m = medium(3.88e-7, false);
        let cav = Cavity::new(F_C, 603.0, ModeFamily::Wgh);
        for b in [-2e-3, 0.0, 1e-3] {
            let p = solve_at_field(&m, &cav, b).unwrap();
            assert_eq!(p.plus.fwhm, 1206.0);
            assert_eq!(p.minus.fwhm, 1206.0);
        }
    }

    #[test]
    fn far_from_crossing_loss_goes_to_one_branch() {
        let m = crossing_medium(-5e-4);
        let cav = Cavity::new(F_C, 603.0, ModeFamily::Wgh);
        let far = solve_at_field(&m, &cav, 0.5).unwrap();
        let (wp, wm) = far.loss_weights;
        assert!(wp.min(wm) < 1e-6 && wp.max(wm) > 1.0 - 1e-6);
        assert!(((wp + wm) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corotating_choice_swaps_branches() {
        let m = crossing_medium(-5e-4);
        let mut cav = Cavity::new(F_C, 603.0, ModeFamily::Wgh);
        let r = solve_at_field(&m, &cav, 1e-3).unwrap();
        cav.corotating = Circular::L;
        let l = solve_at_field(&m, &cav, 1e-3).unwrap();
        assert!((r.loss_weights.0 - l.loss_weights.1).abs() < 1e-12);
        cav.handedness = Handedness::Flipped;
        let flipped = solve_at_field(&m, &cav, 1e-3).unwrap();
        assert_eq!(flipped.loss_weights, r.loss_weights);
    }

    #[test]
    fn bare_lines_meet_at_crossing_and_match_dressed_without_coupling() {
        let m = crossing_medium(-5e-4);
        let cav = Cavity::new(F_C, 603.0, ModeFamily::Wgh);
        let (up, low) = bare_lines(&m, &cav, -5e-4).unwrap();
        assert!((up - F_C).abs() < 1e-3 && (low - F_C).abs() < 1e-3);

        let mut uncoupled = m.clone();
        uncoupled.eta = PerturbationTensor::ZERO;
        for b in [-1e-3, 0.0, 1e-3] {
            let p = solve_at_field(&uncoupled, &cav, b).unwrap();
            assert_eq!((p.f_bare_up, p.f_bare_low), (p.doublet.f_plus, p.doublet.f_minus));
        }
    }

    #[test]
    fn dressed_never_below_bare() {
        let m = crossing_medium(-5e-4);
        let cav = Cavity::new(F_C, 603.0, ModeFamily::Wge);
        let b = linspace(-3e-3, 2e-3, 501);
        let s = sweep(&m, &cav, &b).unwrap();
        for p in &s.points {
            assert!(p.doublet.splitting >= p.bare_separation());
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = medium(0.0, false);
        let cav = Cavity::new(F_C, 0.0, ModeFamily::Wgh);
        assert!(matches!(
            solve_at_field(&m, &cav, 0.0),
            Err(ResponseError::InvalidCavity(_))
        ));
        let cav = Cavity::new(F_C, 603.0, ModeFamily::Wgh);
        assert!(sweep(&m, &cav, &[0.0, 0.0]).is_err());
        assert!(sweep(&m, &cav, &[]).is_err());
    }
}
