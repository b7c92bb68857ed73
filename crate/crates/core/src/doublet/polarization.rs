//! Photon spin states in the circular `{|R>, |L>}` basis and the change of
//! basis to and from linear `(x, y)` polarization.
//!
//! With `x = (|R> + |L>)/√2` and `y = (|L> − |R>)/(i√2)`, a linear state
//! `cx·x + cy·y` has circular amplitudes
//!
//! ```text
//! alpha = (cx + i·cy)/√2,   beta = (cx − i·cy)/√2
//! ```
//!
//! No global phase normalization is applied by the conversion, so pure `y`
//! maps to `(i/√2)(|R> − |L>)`, i.e. `-(i/√2)(|L> − |R>)`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DoubletError;

const NORM_TOL: f64 = 1e-12;
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which physical circular polarization is labelled `|R>`.
///
/// `Flipped` swaps the roles of `|R>` and `|L>` everywhere a label is turned
/// into a physical polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    #[default]
    Standard,
    Flipped,
}

/// Circular polarization label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Circular {
    R,
    L,
}

impl Circular {
    pub fn under(self, handedness: Handedness) -> Circular {
        match (self, handedness) {
            (c, Handedness::Standard) => c,
            (Circular::R, Handedness::Flipped) => Circular::L,
            (Circular::L, Handedness::Flipped) => Circular::R,
        }
    }
}

/// Normalized photon spin state `alpha|R> + beta|L>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    alpha: Complex64,
    beta: Complex64,
}

impl PolarizationState {
    pub const R: Self = Self {
        alpha: Complex64::new(1.0, 0.0),
        beta: Complex64::new(0.0, 0.0),
    };
    pub const L: Self = Self {
        alpha: Complex64::new(0.0, 0.0),
        beta: Complex64::new(1.0, 0.0),
    };

    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, DoubletError> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(DoubletError::NonNormalized { norm });
        }
        Ok(Self { alpha, beta })
    }

    /// Builds a state without checking normalization. Callers guarantee it.
    pub(crate) fn new_unchecked(alpha: Complex64, beta: Complex64) -> Self {
        Self { alpha, beta }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }

    /// Probability of finding the photon in `|R>`.
    pub fn overlap_with_r(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    /// Probability weight on the given circular label.
    pub fn weight(&self, pol: Circular) -> f64 {
        match pol {
            Circular::R => self.alpha.norm_sqr(),
            Circular::L => self.beta.norm_sqr(),
        }
    }

    /// Expectation values `(<σx>, <σy>, <σz>)` on the Poincaré sphere.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let coherence = self.alpha.conj() * self.beta;
        [
            2.0 * coherence.re,
            2.0 * coherence.im,
            self.alpha.norm_sqr() - self.beta.norm_sqr(),
        ]
    }

    /// Inverse of [`LinearPolarization::to_circular`].
    pub fn to_linear(&self) -> LinearPolarization {
        self.to_linear_with(Handedness::Standard)
    }

    pub fn to_linear_with(&self, handedness: Handedness) -> LinearPolarization {
        let (alpha, beta) = match handedness {
            Handedness::Standard => (self.alpha, self.beta),
            Handedness::Flipped => (self.beta, self.alpha),
        };
        LinearPolarization {
            cx: (alpha + beta) * FRAC_1_SQRT_2,
            cy: -I * (alpha - beta) * FRAC_1_SQRT_2,
        }
    }
}

/// Probability of finding the photon in `|R>`.
pub fn overlap_with_r(state: &PolarizationState) -> f64 {
    state.overlap_with_r()
}

/// Jones vector `cx·x + cy·y` in the transverse plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPolarization {
    pub cx: Complex64,
    pub cy: Complex64,
}

impl LinearPolarization {
    pub const X: Self = Self {
        cx: Complex64::new(1.0, 0.0),
        cy: Complex64::new(0.0, 0.0),
    };
    pub const Y: Self = Self {
        cx: Complex64::new(0.0, 0.0),
        cy: Complex64::new(1.0, 0.0),
    };

    pub fn new(cx: Complex64, cy: Complex64) -> Self {
        Self { cx, cy }
    }

    pub fn to_circular(&self) -> Result<PolarizationState, DoubletError> {
        self.to_circular_with(Handedness::Standard)
    }

    pub fn to_circular_with(
        &self,
        handedness: Handedness,
    ) -> Result<PolarizationState, DoubletError> {
        let norm = self.cx.norm_sqr() + self.cy.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(DoubletError::NonNormalized { norm });
        }
        let right = (self.cx + I * self.cy) * FRAC_1_SQRT_2;
        let left = (self.cx - I * self.cy) * FRAC_1_SQRT_2;
        Ok(match handedness {
            Handedness::Standard => PolarizationState::new_unchecked(right, left),
            Handedness::Flipped => PolarizationState::new_unchecked(left, right),
        })
    }
}

/// Linear-to-circular change of basis.
pub fn basis_convert(linear: LinearPolarization) -> Result<PolarizationState, DoubletError> {
    linear.to_circular()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn x_polarized_is_equal_superposition() {
        let s = basis_convert(LinearPolarization::X).unwrap();
        assert!(close(s.alpha(), Complex64::new(FRAC_1_SQRT_2, 0.0), 1e-16));
        assert!(close(s.beta(), Complex64::new(FRAC_1_SQRT_2, 0.0), 1e-16));
    }

    #[test]
    fn y_polarized_matches_circular_definition() {
        let s = basis_convert(LinearPolarization::Y).unwrap();
        // (1/(i√2))(|L> − |R>) = (i/√2)|R> − (i/√2)|L>
        assert!(close(s.alpha(), Complex64::new(0.0, FRAC_1_SQRT_2), 1e-16));
        assert!(close(s.beta(), Complex64::new(0.0, -FRAC_1_SQRT_2), 1e-16));
    }

    #[test]
    fn overlaps() {
        assert_eq!(PolarizationState::R.overlap_with_r(), 1.0);
        assert_eq!(PolarizationState::L.overlap_with_r(), 0.0);
        let eq = PolarizationState::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        )
        .unwrap();
        assert!((overlap_with_r(&eq) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized() {
        let bad = LinearPolarization::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        assert!(matches!(
            bad.to_circular(),
            Err(DoubletError::NonNormalized { .. })
        ));
        assert!(PolarizationState::new(Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn flipped_handedness_swaps_labels() {
        let s = LinearPolarization::Y
            .to_circular_with(Handedness::Flipped)
            .unwrap();
        let t = basis_convert(LinearPolarization::Y).unwrap();
        assert_eq!(s.alpha(), t.beta());
        assert_eq!(s.beta(), t.alpha());
        assert_eq!(Circular::R.under(Handedness::Flipped), Circular::L);
        let back = s.to_linear_with(Handedness::Flipped);
        assert!(close(back.cy, Complex64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn linear_states_sit_on_the_equator() {
        // x and y are the ±1 eigenstates of σx in the circular basis.
        let x = basis_convert(LinearPolarization::X).unwrap().bloch_vector();
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1].abs() < 1e-15 && x[2].abs() < 1e-15);
        let y = basis_convert(LinearPolarization::Y).unwrap().bloch_vector();
        assert!((y[0] + 1.0).abs() < 1e-15 && y[2].abs() < 1e-15);
    }

    fn unit_pair() -> impl Strategy<Value = (Complex64, Complex64)> {
        (0.0f64..std::f64::consts::FRAC_PI_2, -3.2f64..3.2, -3.2f64..3.2).prop_map(
            |(theta, p1, p2)| {
                (
                    Complex64::from_polar(theta.cos(), p1),
                    Complex64::from_polar(theta.sin(), p2),
                )
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn round_trip_is_identity((cx, cy) in unit_pair()) {
            let lin = LinearPolarization::new(cx, cy);
            let back = lin.to_circular().unwrap().to_linear();
            prop_assert!(close(back.cx, cx, 1e-14));
            prop_assert!(close(back.cy, cy, 1e-14));
        }

        #[test]
        fn conversion_matrix_is_unitary((cx, cy) in unit_pair()) {
            // Oracle: explicit 2x2 matrix U and its adjoint applied by hand.
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            let i = Complex64::new(0.0, FRAC_1_SQRT_2);
            let u = [[h, i], [h, -i]];
            let circ = [u[0][0] * cx + u[0][1] * cy, u[1][0] * cx + u[1][1] * cy];
            let s = LinearPolarization::new(cx, cy).to_circular().unwrap();
            prop_assert!(close(s.alpha(), circ[0], 1e-14));
            prop_assert!(close(s.beta(), circ[1], 1e-14));
            let lin = [
                u[0][0].conj() * circ[0] + u[1][0].conj() * circ[1],
                u[0][1].conj() * circ[0] + u[1][1].conj() * circ[1],
            ];
            prop_assert!(close(lin[0], cx, 1e-14));
            prop_assert!(close(lin[1], cy, 1e-14));
        }
    }
}
