//! Reference scenario: a sapphire whispering-gallery doublet near 11.77 GHz
//! with a minimal splitting of 6.46 kHz at −0.5 mT and 1206 Hz linewidths.
//!
//! The medium is derived from those observables. The R↔L coupling sits in
//! the off-diagonal permittivity perturbation. The static permeability
//! offset cancels the Fe³⁺ tail at the crossing field. The line strength
//! sets how fast the bare lines separate away from the crossing.

use num_complex::Complex64;

use crate::doublet::ModeFamily;
use crate::medium::{EsrLine, MediumModel, PerturbationTensor};
use crate::response::{linspace, Cavity};

pub const F_C_HZ: f64 = 11.77355e9;
/// Half of the 6.46 kHz minimal splitting.
pub const G_HZ: f64 = 3230.0;
/// Half of the 1206 Hz intrinsic linewidth.
pub const DELTA0_HZ: f64 = 603.0;
pub const B0_T: f64 = -0.5e-3;
/// Rate at which each bare line leaves `f_c` away from the crossing.
pub const ARM_SLOPE_HZ_PER_T: f64 = 2.0e7;

pub const FE_DIPOLE_F0_HZ: f64 = 12.04e9;
/// Effective Zeeman tuning of the dipole line; the quadrupole line tunes twice as fast.
pub const FE_DIPOLE_SLOPE_HZ_PER_T: f64 = 2.8e8;
pub const FE_GAMMA_HZ: f64 = 2.0;
pub const CR_F0_HZ: f64 = 11.44e9;

pub const ETA_M11: f64 = 2.0e-7;
pub const EPSILON: f64 = 10.0;

pub const B_MIN_T: f64 = -1.5e-3;
pub const B_MAX_T: f64 = 0.5e-3;
pub const N_B: usize = 201;
pub const F_SPAN_HZ: f64 = 60.0e3;
pub const N_F: usize = 2001;

/// Line strength giving `d(f_c·az)/dB = ARM_SLOPE_HZ_PER_T` at the crossing.
fn fe_dipole_chi0(coupling: f64) -> f64 {
    let d0 = FE_DIPOLE_F0_HZ + FE_DIPOLE_SLOPE_HZ_PER_T * B0_T - F_C_HZ;
    let g2 = FE_GAMMA_HZ * FE_GAMMA_HZ;
    let d2 = d0 * d0;
    // f_c/2 · coupling·chi0·γ · s·(Δ²−γ²)/(Δ²+γ²)² = arm slope
    2.0 * ARM_SLOPE_HZ_PER_T * (d2 + g2).powi(2)
        / (F_C_HZ * FE_DIPOLE_SLOPE_HZ_PER_T * (d2 - g2) * coupling * FE_GAMMA_HZ)
}

pub fn lines() -> Vec<EsrLine> {
    vec![
        EsrLine {
            f0: FE_DIPOLE_F0_HZ,
            slope: FE_DIPOLE_SLOPE_HZ_PER_T,
            gamma: FE_GAMMA_HZ,
            chi0: fe_dipole_chi0(1.0),
            label: "Fe3+ dipole".into(),
        },
        EsrLine {
            f0: FE_DIPOLE_F0_HZ,
            slope: 2.0 * FE_DIPOLE_SLOPE_HZ_PER_T,
            gamma: FE_GAMMA_HZ,
            chi0: 0.0,
            label: "Fe3+ quadrupole".into(),
        },
        EsrLine {
            f0: CR_F0_HZ,
            slope: FE_DIPOLE_SLOPE_HZ_PER_T,
            gamma: FE_GAMMA_HZ,
            chi0: 0.0,
            label: "Cr3+ dipole".into(),
        },
    ]
}

pub fn medium() -> MediumModel {
    let coupling = 1.0;
    let eta_m21 = G_HZ * std::f64::consts::SQRT_2 / F_C_HZ;
    let eta = PerturbationTensor::new(ETA_M11, Complex64::new(eta_m21, 0.0))
        .expect("scenario permittivity is perturbative");
    let lines = lines();
    let chi_at_crossing: f64 = lines
        .iter()
        .map(|l| crate::medium::susceptibility(l, B0_T, F_C_HZ).re)
        .sum();
    let nu_static = PerturbationTensor::new(
        -ETA_M11 - coupling * chi_at_crossing,
        Complex64::new(0.0, 0.0),
    )
    .expect("scenario permeability is perturbative");
    MediumModel::new(EPSILON, 1.0, eta, nu_static, lines, coupling)
        .expect("scenario medium is valid")
}

pub fn cavity() -> Cavity {
    Cavity::new(F_C_HZ, DELTA0_HZ, ModeFamily::Wgh)
}

pub fn b_axis() -> Vec<f64> {
    linspace(B_MIN_T, B_MAX_T, N_B)
}

/// Detuning axis centred on `f_c`.
pub fn f_axis() -> Vec<f64> {
    linspace(-0.5 * F_SPAN_HZ, 0.5 * F_SPAN_HZ, N_F)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::permeability_perturbation;
    use crate::response::solve_at_field;

    #[test]
    fn gyrotropy_crosses_zero_at_b0() {
        let m = medium();
        let nu = permeability_perturbation(&m, B0_T, F_C_HZ).unwrap().nu;
        // ν22 cancels the permittivity diagonal, so az vanishes.
        assert!((nu.m22() + m.eta.m22()).abs() < 1e-18);
        let p = solve_at_field(&m, &cavity(), B0_T).unwrap();
        assert!(p.bloch.az.abs() < 1e-15);
        assert!((p.doublet.splitting - 2.0 * G_HZ).abs() < 1e-6);
    }

    #[test]
    fn arm_slope_and_tail_regime() {
        let m = medium();
        let h = 1e-7;
        let up = solve_at_field(&m, &cavity(), B0_T + h).unwrap().bloch.az;
        let dn = solve_at_field(&m, &cavity(), B0_T - h).unwrap().bloch.az;
        let slope = F_C_HZ * (up - dn) / (2.0 * h);
        assert!((slope.abs() / ARM_SLOPE_HZ_PER_T - 1.0).abs() < 1e-6);
        let fe = &m.lines[0];
        assert!(fe.detuning(B0_T, F_C_HZ) > 1e7 * fe.gamma);
    }

    #[test]
    fn spin_loss_is_negligible_against_intrinsic_width() {
        let p = solve_at_field(&medium(), &cavity(), B0_T).unwrap();
        assert!(p.spin_loss > 0.0 && p.spin_loss < 1.0);
        assert!((p.plus.fwhm - 1206.0).abs() < 0.5);
    }
}
