//! Quantized field amplitudes and the classical energy functional.

use num_complex::Complex64;

use super::DoubletError;
use crate::medium::{MediumModel, PerturbationTensor};

/// Reduced Planck constant, CODATA 2018 (exact-SI value of h / 2π).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Single-photon field prefactor `sqrt(2π·ħ·ω / (V·ε))` with `ω = 2π·freq`.
///
/// Gaussian-unit normalization: the result scales as `sqrt(freq)` and as
/// `1/sqrt(mode_volume)`.
pub fn vacuum_amplitude(freq: f64, mode_volume: f64, epsilon: f64) -> Result<f64, DoubletError> {
    for (name, v) in [
        ("freq", freq),
        ("mode_volume", mode_volume),
        ("epsilon", epsilon),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(DoubletError::NonPositive(name));
        }
    }
    let omega = 2.0 * std::f64::consts::PI * freq;
    Ok((2.0 * std::f64::consts::PI * HBAR * omega / (mode_volume * epsilon)).sqrt())
}

/// `v† · (I + M) · v` for a 2-vector in the circular basis.
fn hermitian_form(v: &[Complex64; 2], m: &PerturbationTensor) -> Complex64 {
    let m11 = m.m11();
    let mv0 = v[0] * (1.0 + m11) + m.m12() * v[1];
    let mv1 = m.m21() * v[0] + v[1] * (1.0 - m11);
    v[0].conj() * mv0 + v[1].conj() * mv1
}

/// `½[E†·ε(I+η)·E + B†·μ⁻¹(I+ν)·B]` with fields in the `{|R>, |L>}` basis.
///
/// Uses the static permeability perturbation of the medium.
pub fn energy_density(e_field: &[Complex64; 2], b_field: &[Complex64; 2], medium: &MediumModel) -> f64 {
    energy_density_with(e_field, b_field, medium, &medium.nu_static)
}

/// As [`energy_density`] with an explicit permeability perturbation, e.g. the
/// field-tuned one from [`crate::medium::permeability_perturbation`].
pub fn energy_density_with(
    e_field: &[Complex64; 2],
    b_field: &[Complex64; 2],
    medium: &MediumModel,
    nu: &PerturbationTensor,
) -> f64 {
    let electric = medium.epsilon * hermitian_form(e_field, &medium.eta);
    let magnetic = hermitian_form(b_field, nu) / medium.mu;
    // Hermitian forms are real; the imaginary residue is rounding only.
    0.5 * (electric + magnetic).re
}
