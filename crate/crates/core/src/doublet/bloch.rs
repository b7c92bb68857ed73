use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::polarization::PolarizationState;
use super::DoubletError;
use crate::medium::PerturbationTensor;

/// Linear polarization family of the whispering-gallery mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ModeFamily {
    /// Dominant axial magnetic field; x (radially) polarized electric field.
    #[default]
    #[serde(rename = "WGH")]
    Wgh,
    /// Dominant axial electric field; y polarized.
    #[serde(rename = "WGE")]
    Wge,
}

/// Effective Hamiltonian `omega0 · (a0·I + ax·σx + ay·σy + az·σz)` per photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochCoefficients {
    pub a0: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    /// Bare mode frequency scale in Hz.
    pub omega0: f64,
}

impl BlochCoefficients {
    pub fn new(a0: f64, ax: f64, ay: f64, az: f64, omega0: f64) -> Result<Self, DoubletError> {
        let b = Self {
            a0,
            ax,
            ay,
            az,
            omega0,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), DoubletError> {
        if ![self.a0, self.ax, self.ay, self.az, self.omega0]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(DoubletError::InvalidBloch("non-finite coefficient"));
        }
        if self.omega0 <= 0.0 {
            return Err(DoubletError::InvalidBloch("omega0 must be positive"));
        }
        if self.radius() >= 1.0 {
            return Err(DoubletError::InvalidBloch(
                "Bloch vector outside the perturbative regime",
            ));
        }
        Ok(())
    }

    /// `|(ax, ay, az)|`
    pub fn radius(&self) -> f64 {
        self.ax.hypot(self.ay).hypot(self.az)
    }

    /// `|(ax, ay)|`: the R↔L coupling.
    pub fn transverse(&self) -> f64 {
        self.ax.hypot(self.ay)
    }

    /// Dense Hamiltonian in Hz, row-major in the `{|R>, |L>}` basis.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let w = self.omega0;
        [
            [
                Complex64::new(w * (self.a0 + self.az), 0.0),
                Complex64::new(w * self.ax, -w * self.ay),
            ],
            [
                Complex64::new(w * self.ax, w * self.ay),
                Complex64::new(w * (self.a0 - self.az), 0.0),
            ],
        ]
    }
}

/// Projects the material perturbations onto the Pauli basis.
///
/// WGH: `az = (η22+ν22)/2`, `ax + i·ay = (η21−ν21)/√2`.
/// WGE has the same `az` and the transverse part negated.
pub fn bloch_coefficients(
    eta: &PerturbationTensor,
    nu: &PerturbationTensor,
    family: ModeFamily,
    omega0: f64,
) -> Result<BlochCoefficients, DoubletError> {
    let az = 0.5 * (eta.m22() + nu.m22());
    let transverse = match family {
        ModeFamily::Wgh => (eta.m21() - nu.m21()) * FRAC_1_SQRT_2,
        ModeFamily::Wge => (nu.m21() - eta.m21()) * FRAC_1_SQRT_2,
    };
    BlochCoefficients::new(1.0, transverse.re, transverse.im, az, omega0)
}

/// The two dressed modes at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubletSolution {
    pub f_plus: f64,
    pub f_minus: f64,
    pub state_plus: PolarizationState,
    pub state_minus: PolarizationState,
    pub splitting: f64,
}

/// Closed-form eigen-decomposition of the 2x2 photon-spin Hamiltonian.
///
/// Eigenstates carry a real non-negative `|R>` amplitude; when that amplitude
/// vanishes the `|L>` amplitude is made real positive. A zero Bloch vector
/// returns `|R>` as the upper state and `|L>` as the lower one.
pub fn diagonalize(b: &BlochCoefficients) -> DoubletSolution {
    let r = b.radius();
    let f_plus = b.omega0 * (b.a0 + r);
    let f_minus = b.omega0 * (b.a0 - r);
    let splitting = 2.0 * b.omega0 * r;
    if r == 0.0 {
        return DoubletSolution {
            f_plus,
            f_minus,
            state_plus: PolarizationState::R,
            state_minus: PolarizationState::L,
            splitting,
        };
    }

    // Moduli of the upper eigenvector (r+az, ax+i·ay)/norm, each computed from
    // whichever of r±az avoids cancellation.
    let rho = b.transverse();
    let (north, south) = if b.az >= 0.0 {
        let big = ((r + b.az) / (2.0 * r)).sqrt();
        (big, rho / (2.0 * r * (r + b.az)).sqrt())
    } else {
        let big = ((r - b.az) / (2.0 * r)).sqrt();
        (rho / (2.0 * r * (r - b.az)).sqrt(), big)
    };
    let phase = if rho > 0.0 {
        Complex64::new(b.ax / rho, b.ay / rho)
    } else {
        Complex64::new(1.0, 0.0)
    };

    let state_plus = phased(north, south * phase);
    let state_minus = phased(south, -north * phase);
    DoubletSolution {
        f_plus,
        f_minus,
        state_plus,
        state_minus,
        splitting,
    }
}

fn phased(alpha: f64, beta: Complex64) -> PolarizationState {
    if alpha == 0.0 {
        PolarizationState::new_unchecked(
            Complex64::new(0.0, 0.0),
            Complex64::new(beta.norm(), 0.0),
        )
    } else {
        PolarizationState::new_unchecked(Complex64::new(alpha, 0.0), beta)
    }
}
