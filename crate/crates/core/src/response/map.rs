use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::transmission::{power_db, s21_at};
use super::{check_axis, solve_at_field, Cavity, ResponseError};
use crate::medium::MediumModel;

/// Additive complex Gaussian noise, specified by SNR relative to the row peak.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn snr(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db: Some(snr_db),
            seed,
        }
    }
}

/// `|S21|²` in dB on a (field × detuning) grid, row-major with field outer.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMap {
    pub b_axis: Vec<f64>,
    /// Detuning from `f_c`.
    pub f_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub snr_db: Option<f64>,
}

impl TransmissionMap {
    pub fn n_rows(&self) -> usize {
        self.b_axis.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.f_axis.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.b_axis
            .iter()
            .copied()
            .zip(self.values.chunks_exact(self.f_axis.len()))
    }

    /// Rows whose field lies in `[b_lo, b_hi]`.
    pub fn window(&self, b_lo: f64, b_hi: f64) -> TransmissionMap {
        let mut b_axis = Vec::new();
        let mut values = Vec::new();
        for (b, row) in self.rows() {
            if b >= b_lo && b <= b_hi {
                b_axis.push(b);
                values.extend_from_slice(row);
            }
        }
        TransmissionMap {
            b_axis,
            f_axis: self.f_axis.clone(),
            values,
            seed: self.seed,
            snr_db: self.snr_db,
        }
    }

    pub fn validate(&self) -> Result<(), ResponseError> {
        check_axis(&self.b_axis, "map field axis must be strictly increasing")?;
        check_axis(&self.f_axis, "map frequency axis must be strictly increasing")?;
        if self.f_axis.len() < 2 {
            return Err(ResponseError::InvalidAxis(
                "map needs at least two frequency points",
            ));
        }
        if self.values.len() != self.b_axis.len() * self.f_axis.len() {
            return Err(ResponseError::InvalidAxis("grid size does not match axes"));
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(ResponseError::InvalidAxis("non-finite map value"));
        }
        Ok(())
    }
}

/// `n` evenly spaced points from `start` to `stop` inclusive; `[start]` when `n == 1`.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// One row of the map: noisy (optionally) transmission in dB at field `b`.
///
/// `row_index` selects the noise substream, so a row is reproducible on its
/// own and independent of evaluation order.
pub fn trace_at_field(
    medium: &MediumModel,
    cavity: &Cavity,
    b: f64,
    f_axis: &[f64],
    noise: NoiseSpec,
    row_index: u64,
) -> Result<Vec<f64>, ResponseError> {
    let point = solve_at_field(medium, cavity, b)?;
    let modes = point.modes().map(|m| super::ModeResponse {
        f_center: m.f_center - cavity.f_c,
        ..m
    });
    let clean: Vec<Complex64> = f_axis
        .iter()
        .map(|&d| s21_at(&modes, d, cavity.sign))
        .collect();
    let Some(snr_db) = noise.snr_db else {
        return Ok(clean.into_iter().map(power_db).collect());
    };

    let peak = clean.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
    let sigma = (0.5 * peak * 10f64.powf(-snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(row_index);
    Ok(clean
        .into_iter()
        .map(|s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            power_db(s + Complex64::new(re, im) * sigma)
        })
        .collect())
}

/// Synthesizes a transmission map; rows are computed in parallel.
pub fn synthesize_map(
    medium: &MediumModel,
    cavity: &Cavity,
    b_axis: &[f64],
    f_axis: &[f64],
    noise: NoiseSpec,
) -> Result<TransmissionMap, ResponseError> {
    check_axis(b_axis, "field axis must be non-empty, finite and strictly increasing")?;
    check_axis(f_axis, "frequency axis must be non-empty, finite and strictly increasing")?;
    if let Some(snr) = noise.snr_db {
        if !snr.is_finite() {
            return Err(ResponseError::InvalidNoise("snr_db must be finite"));
        }
    }
    let rows = b_axis
        .par_iter()
        .enumerate()
        .map(|(i, &b)| trace_at_field(medium, cavity, b, f_axis, noise, i as u64))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TransmissionMap {
        b_axis: b_axis.to_vec(),
        f_axis: f_axis.to_vec(),
        values: rows.concat(),
        seed: noise.seed,
        snr_db: noise.snr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doublet::ModeFamily;
    use crate::medium::{validate_perturbation, PerturbationTensor};
    use crate::response::{power_db, s21_trace};

    const F_C: f64 = 11.77355e9;

    fn setup() -> (MediumModel, Cavity) {
        let eta = validate_perturbation(1e-7, Complex64::new(3.88e-7, 0.0)).unwrap();
        let m = MediumModel::new(10.0, 1.0, eta, PerturbationTensor::ZERO, vec![], 0.0).unwrap();
        (m, Cavity::new(F_C, 603.0, ModeFamily::Wgh))
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.5e-3, 0.5e-3, 201);
        assert_eq!(v.len(), 201);
        assert_eq!(v[0], -1.5e-3);
        assert_eq!(v[200], 0.5e-3);
        assert!((v[100] + 0.5e-3).abs() < 1e-18);
        assert_eq!(linspace(3.0, 9.0, 1), vec![3.0]);
    }

    #[test]
    fn noiseless_single_row_matches_trace() {
        let (m, cav) = setup();
        let f = linspace(-1e4, 1e4, 401);
        let map = synthesize_map(&m, &cav, &[2e-4], &f, NoiseSpec::none()).unwrap();
        let point = solve_at_field(&m, &cav, 2e-4).unwrap();
        let abs_f: Vec<f64> = f.iter().map(|d| F_C + d).collect();
        let expected: Vec<f64> = s21_trace(&point.modes(), &abs_f, cav.sign)
            .into_iter()
            .map(power_db)
            .collect();
        for (a, b) in map.row(0).iter().zip(&expected) {
            // Same model evaluated in the detuning frame vs the absolute frame.
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn same_seed_same_grid() {
        let (m, cav) = setup();
        let b = linspace(-1e-3, 1e-3, 7);
        let f = linspace(-1e4, 1e4, 101);
        let a = synthesize_map(&m, &cav, &b, &f, NoiseSpec::snr(20.0, 9)).unwrap();
        let c = synthesize_map(&m, &cav, &b, &f, NoiseSpec::snr(20.0, 9)).unwrap();
        assert_eq!(a, c);
        let d = synthesize_map(&m, &cav, &b, &f, NoiseSpec::snr(20.0, 10)).unwrap();
        assert_ne!(a.values, d.values);
        a.validate().unwrap();
    }

    #[test]
    fn rows_do_not_depend_on_evaluation_order() {
        let (m, cav) = setup();
        let b = linspace(-1e-3, 1e-3, 5);
        let f = linspace(-1e4, 1e4, 51);
        let noise = NoiseSpec::snr(15.0, 3);
        let map = synthesize_map(&m, &cav, &b, &f, noise).unwrap();
        for i in (0..b.len()).rev() {
            let row = trace_at_field(&m, &cav, b[i], &f, noise, i as u64).unwrap();
            assert_eq!(map.row(i), row.as_slice());
        }
    }

    #[test]
    fn noise_level_matches_snr() {
        let (m, cav) = setup();
        let f = linspace(-4e5, 4e5, 20001);
        let row = trace_at_field(&m, &cav, 0.0, &f, NoiseSpec::snr(20.0, 4), 0).unwrap();
        // Far wings carry |S|² ~ 1e-5; mean power there is the noise floor.
        let wing: Vec<f64> = row[..2000].iter().map(|d| 10f64.powf(d / 10.0)).collect();
        let mean = wing.iter().sum::<f64>() / wing.len() as f64;
        assert!((mean / 0.01 - 1.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn rejects_bad_axes() {
        let (m, cav) = setup();
        assert!(synthesize_map(&m, &cav, &[], &[0.0, 1.0], NoiseSpec::none()).is_err());
        assert!(synthesize_map(&m, &cav, &[0.0], &[1.0, 0.0], NoiseSpec::none()).is_err());
    }
}
