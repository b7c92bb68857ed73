//! Photon-spin doublet: the effective two-level Hamiltonian built from the
//! material perturbations, its closed-form eigen-solution, polarization
//! algebra, and the field-level helpers (vacuum amplitude, energy density).

mod bloch;
mod field;
mod polarization;

use thiserror::Error;

pub use bloch::{bloch_coefficients, diagonalize, BlochCoefficients, DoubletSolution, ModeFamily};
pub use field::{energy_density, energy_density_with, vacuum_amplitude, HBAR};
pub use polarization::{
    basis_convert, overlap_with_r, Circular, Handedness, LinearPolarization, PolarizationState,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DoubletError {
    #[error("polarization vector is not normalized (|a|^2 + |b|^2 = {norm})")]
    NonNormalized { norm: f64 },
    #[error("invalid Bloch coefficients: {0}")]
    InvalidBloch(&'static str),
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
}
