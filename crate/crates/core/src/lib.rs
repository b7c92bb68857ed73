//! Whispering-gallery mode doublet as a coupled photon-spin / bosonic system.
//!
//! - [`medium`]: gyro-anisotropic material perturbations and the field-tuned
//!   ESR susceptibility.
//! - [`doublet`]: the effective 2x2 Hamiltonian, its closed-form solution and
//!   polarization algebra.
//! - [`response`]: per-field linewidths, S21 traces and transmission maps.
//! - [`estimation`]: Levenberg-Marquardt core, peak finding, Lorentzian pair
//!   and avoided-crossing fits.
//!
//! Units are SI throughout: tesla for fields, hertz for frequencies.

pub mod doublet;
pub mod estimation;
pub mod medium;
pub mod response;
pub mod scenario;
