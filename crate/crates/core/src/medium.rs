//! Gyro-anisotropic medium description.
//!
//! Both material tensors are written as an isotropic scalar times `(I + M)`,
//! where `M` is a small traceless Hermitian perturbation expressed in the
//! circular `{|R>, |L>}` basis. Diagonal entries of `M` split the two
//! circular polarizations (gyrotropy); off-diagonal entries couple them
//! (static anisotropy and backscatter).
//!
//! The permeability perturbation is tuned by an external field through the
//! dispersive tail of one or more electron spin resonance lines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediumError {
    #[error("perturbation tensor outside the perturbative regime: spectral norm {norm} >= 1")]
    SmallnessViolation { norm: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid ESR line `{label}`: {reason}")]
    InvalidLine { label: String, reason: &'static str },
    #[error("invalid medium: {0}")]
    InvalidMedium(&'static str),
}

/// Traceless Hermitian 2x2 perturbation in the `{|R>, |L>}` basis.
///
/// ```text
/// | m11        conj(m21) |
/// | m21        -m11      |
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationTensor {
    m11: f64,
    m21: Complex64,
}

impl PerturbationTensor {
    pub const ZERO: Self = Self {
        m11: 0.0,
        m21: Complex64::new(0.0, 0.0),
    };

    /// Validates and builds a tensor from its two independent elements.
    pub fn new(m11: f64, m21: Complex64) -> Result<Self, MediumError> {
        if !m11.is_finite() || !m21.re.is_finite() || !m21.im.is_finite() {
            return Err(MediumError::NonFinite("perturbation tensor element"));
        }
        let tensor = Self { m11, m21 };
        let norm = tensor.spectral_norm();
        if norm >= 1.0 {
            return Err(MediumError::SmallnessViolation { norm });
        }
        Ok(tensor)
    }

    /// `<R|M|R>`
    pub fn m11(&self) -> f64 {
        self.m11
    }

    /// `<L|M|L>`, always `-m11`.
    pub fn m22(&self) -> f64 {
        -self.m11
    }

    /// `<L|M|R>`
    pub fn m21(&self) -> Complex64 {
        self.m21
    }

    /// `<R|M|L>`, always `conj(m21)`.
    pub fn m12(&self) -> Complex64 {
        self.m21.conj()
    }

    /// Eigenvalues of a traceless Hermitian matrix are `±sqrt(m11² + |m21|²)`.
    pub fn spectral_norm(&self) -> f64 {
        self.m11.hypot(self.m21.norm())
    }

    /// Dense row-major matrix `[[m11, m12], [m21, m22]]`.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.m11, 0.0), self.m12()],
            [self.m21, Complex64::new(self.m22(), 0.0)],
        ]
    }

    /// Adds `diag(+shift, -shift)`.
    pub fn with_diagonal_shift(&self, shift: f64) -> Result<Self, MediumError> {
        Self::new(self.m11 + shift, self.m21)
    }
}

/// Convenience wrapper around [`PerturbationTensor::new`].
pub fn validate_perturbation(m11: f64, m21: Complex64) -> Result<PerturbationTensor, MediumError> {
    PerturbationTensor::new(m11, m21)
}

/// Phenomenological magnetic resonance line with linear Zeeman tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsrLine {
    /// Zero-field line center.
    #[serde(rename = "f0_hz")]
    pub f0: f64,
    /// Tuning rate of the line center with the applied field.
    #[serde(rename = "slope_hz_per_t")]
    pub slope: f64,
    /// Half-width at half-maximum.
    #[serde(rename = "gamma_hz")]
    pub gamma: f64,
    /// Peak susceptibility at line center.
    pub chi0: f64,
    #[serde(default)]
    pub label: String,
}

impl EsrLine {
    pub fn validate(&self) -> Result<(), MediumError> {
        let fail = |reason| {
            Err(MediumError::InvalidLine {
                label: self.label.clone(),
                reason,
            })
        };
        if ![self.f0, self.slope, self.gamma, self.chi0]
            .iter()
            .all(|v| v.is_finite())
        {
            return fail("non-finite parameter");
        }
        if self.f0 <= 0.0 {
            return fail("f0 must be positive");
        }
        if self.gamma <= 0.0 {
            return fail("gamma must be positive");
        }
        if self.chi0 < 0.0 {
            return fail("chi0 must be non-negative");
        }
        Ok(())
    }

    /// Line center at the given applied field.
    pub fn center(&self, b_field: f64) -> f64 {
        self.f0 + self.slope * b_field
    }

    /// Detuning of the line center from the probe frequency.
    pub fn detuning(&self, b_field: f64, probe_freq: f64) -> f64 {
        self.center(b_field) - probe_freq
    }
}

/// Complex single-pole Lorentzian susceptibility `chi0 * gamma / (detuning - i*gamma)`.
///
/// The real (dispersive) part is odd in the detuning; the imaginary
/// (absorptive) part is even and non-negative.
pub fn susceptibility(line: &EsrLine, b_field: f64, probe_freq: f64) -> Complex64 {
    let detuning = line.detuning(b_field, probe_freq);
    let denom = detuning * detuning + line.gamma * line.gamma;
    let scale = line.chi0 * line.gamma / denom;
    Complex64::new(scale * detuning, scale * line.gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediumModel {
    pub epsilon: f64,
    pub mu: f64,
    /// Static permittivity perturbation.
    pub eta: PerturbationTensor,
    /// Field-independent permeability perturbation, including any constant
    /// gyrotropic offset.
    pub nu_static: PerturbationTensor,
    pub lines: Vec<EsrLine>,
    pub coupling: f64,
}

impl MediumModel {
    pub fn new(
        epsilon: f64,
        mu: f64,
        eta: PerturbationTensor,
        nu_static: PerturbationTensor,
        lines: Vec<EsrLine>,
        coupling: f64,
    ) -> Result<Self, MediumError> {
        let medium = Self {
            epsilon,
            mu,
            eta,
            nu_static,
            lines,
            coupling,
        };
        medium.validate()?;
        Ok(medium)
    }

    /// Isotropic, non-gyrotropic medium with no resonance lines.
    pub fn isotropic(epsilon: f64, mu: f64) -> Result<Self, MediumError> {
        Self::new(
            epsilon,
            mu,
            PerturbationTensor::ZERO,
            PerturbationTensor::ZERO,
            Vec::new(),
            0.0,
        )
    }

    pub fn validate(&self) -> Result<(), MediumError> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(MediumError::InvalidMedium("epsilon must be positive"));
        }
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(MediumError::InvalidMedium("mu must be positive"));
        }
        if !self.coupling.is_finite() {
            return Err(MediumError::NonFinite("coupling"));
        }
        self.lines.iter().try_for_each(EsrLine::validate)
    }

    /// Total susceptibility summed over all lines.
    pub fn total_susceptibility(&self, b_field: f64, probe_freq: f64) -> Complex64 {
        self.lines
            .iter()
            .map(|line| susceptibility(line, b_field, probe_freq))
            .sum()
    }
}

/// Field-dependent permeability perturbation and the accompanying absorptive sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermeabilityPerturbation {
    pub nu: PerturbationTensor,
    /// `Σ Im χ` over all lines (not scaled by the coupling).
    pub absorption: f64,
}

/// `ν(B) = ν_static + diag(+δν, −δν)` with `δν = coupling · Σ Re χ`.
///
/// Gyrotropy only enters the circular-basis diagonal; the off-diagonal
/// anisotropy of `nu_static` is untouched.
pub fn permeability_perturbation(
    medium: &MediumModel,
    b_field: f64,
    probe_freq: f64,
) -> Result<PermeabilityPerturbation, MediumError> {
    let chi = medium.total_susceptibility(b_field, probe_freq);
    let nu = medium
        .nu_static
        .with_diagonal_shift(medium.coupling * chi.re)?;
    Ok(PermeabilityPerturbation {
        nu,
        absorption: chi.im,
    })
}

/// On-disk form of a perturbation tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorConfig {
    pub m11: f64,
    #[serde(default)]
    pub m21_re: f64,
    #[serde(default)]
    pub m21_im: f64,
}

impl TensorConfig {
    pub fn build(&self) -> Result<PerturbationTensor, MediumError> {
        PerturbationTensor::new(self.m11, Complex64::new(self.m21_re, self.m21_im))
    }
}

impl From<PerturbationTensor> for TensorConfig {
    fn from(t: PerturbationTensor) -> Self {
        Self {
            m11: t.m11,
            m21_re: t.m21.re,
            m21_im: t.m21.im,
        }
    }
}

/// JSON section describing a [`MediumModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub epsilon: f64,
    pub mu: f64,
    pub eta: TensorConfig,
    pub nu_static: TensorConfig,
    #[serde(default)]
    pub lines: Vec<EsrLine>,
    pub coupling: f64,
}

impl From<&MediumModel> for MediumConfig {
    fn from(m: &MediumModel) -> Self {
        Self {
            epsilon: m.epsilon,
            mu: m.mu,
            eta: m.eta.into(),
            nu_static: m.nu_static.into(),
            lines: m.lines.clone(),
            coupling: m.coupling,
        }
    }
}

impl MediumConfig {
    pub fn build(&self) -> Result<MediumModel, MediumError> {
        MediumModel::new(
            self.epsilon,
            self.mu,
            self.eta.build()?,
            self.nu_static.build()?,
            self.lines.clone(),
            self.coupling,
        )
    }
}
