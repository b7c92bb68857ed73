//! Run configuration: one JSON document with `medium`, `cavity`, `sweep`,
//! `noise` and `fit` sections. Units are carried in key names.

use std::path::Path;

use doublet_core::estimation::{LmOptions, MapFitOptions};
use doublet_core::medium::{MediumConfig, MediumModel, TensorConfig};
use doublet_core::response::{linspace, Cavity, NoiseSpec};
use doublet_core::scenario;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The bundled reference configuration.
pub const PAPER_JSON: &str = include_str!("../configs/paper.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub b_min_t: f64,
    pub b_max_t: f64,
    pub n_b: usize,
    pub f_span_hz: f64,
    pub n_f: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub min_prominence_db: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub lambda0: f64,
    pub smooth_bins: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        let map = MapFitOptions::default();
        Self {
            min_prominence_db: map.min_prominence_db,
            max_iter: map.lm.max_iter,
            tol: map.lm.tol,
            lambda0: map.lm.lambda0,
            smooth_bins: map.smooth_bins,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub medium: MediumConfig,
    pub cavity: Cavity,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub fit: FitConfig,
}

fn invalid(path: impl Into<String>, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {message}", path.into()))
}

fn finite(path: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, "must be finite"))
    }
}

fn positive(path: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Reference scenario, matching [`PAPER_JSON`].
    pub fn paper() -> Self {
        Self {
            medium: MediumConfig::from(&scenario::medium()),
            cavity: scenario::cavity(),
            sweep: SweepConfig {
                b_min_t: scenario::B_MIN_T,
                b_max_t: scenario::B_MAX_T,
                n_b: scenario::N_B,
                f_span_hz: scenario::F_SPAN_HZ,
                n_f: scenario::N_F,
            },
            noise: NoiseConfig::default(),
            fit: FitConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.build_medium()?;

        let c = &self.cavity;
        positive("cavity.f_c_hz", c.f_c)?;
        positive("cavity.delta0_hz", c.delta0)?;
        finite("cavity.port.amplitude_plus", c.port.amplitude_plus)?;
        finite("cavity.port.amplitude_minus", c.port.amplitude_minus)?;
        finite("cavity.port.relative_phase_rad", c.port.relative_phase_rad)?;

        let s = &self.sweep;
        finite("sweep.b_min_t", s.b_min_t)?;
        finite("sweep.b_max_t", s.b_max_t)?;
        if s.n_b < 1 {
            return Err(invalid("sweep.n_b", "must be at least 1"));
        }
        if s.n_b > 1 && s.b_min_t >= s.b_max_t {
            return Err(invalid("sweep.b_max_t", "must exceed sweep.b_min_t when n_b > 1"));
        }
        if s.n_f < 2 {
            return Err(invalid("sweep.n_f", "must be at least 2"));
        }
        positive("sweep.f_span_hz", s.f_span_hz)?;

        if let Some(snr) = self.noise.snr_db {
            finite("noise.snr_db", snr)?;
        }

        let f = &self.fit;
        if !(f.min_prominence_db.is_finite() && f.min_prominence_db >= 0.0) {
            return Err(invalid("fit.min_prominence_db", "must be non-negative"));
        }
        if f.max_iter == 0 {
            return Err(invalid("fit.max_iter", "must be at least 1"));
        }
        positive("fit.tol", f.tol)?;
        positive("fit.lambda0", f.lambda0)?;
        Ok(())
    }

    pub fn build_medium(&self) -> Result<MediumModel, CliError> {
        let m = &self.medium;
        let tensor = |path: &str, t: &TensorConfig| {
            t.build().map_err(|e| invalid(path, e))
        };
        let eta = tensor("medium.eta", &m.eta)?;
        let nu = tensor("medium.nu_static", &m.nu_static)?;
        for (i, line) in m.lines.iter().enumerate() {
            line.validate().map_err(|e| invalid(format!("medium.lines[{i}]"), e))?;
        }
        positive("medium.epsilon", m.epsilon)?;
        positive("medium.mu", m.mu)?;
        finite("medium.coupling", m.coupling)?;
        MediumModel::new(m.epsilon, m.mu, eta, nu, m.lines.clone(), m.coupling)
            .map_err(|e| invalid("medium", e))
    }

    pub fn b_axis(&self) -> Vec<f64> {
        linspace(self.sweep.b_min_t, self.sweep.b_max_t, self.sweep.n_b)
    }

    /// Detuning axis, symmetric about `f_c`.
    pub fn f_axis(&self) -> Vec<f64> {
        let half = 0.5 * self.sweep.f_span_hz;
        linspace(-half, half, self.sweep.n_f)
    }

    pub fn noise(&self, seed_override: Option<u64>) -> NoiseSpec {
        NoiseSpec {
            snr_db: self.noise.snr_db,
            seed: seed_override.unwrap_or(self.noise.seed),
        }
    }

    pub fn map_fit_options(&self) -> MapFitOptions {
        MapFitOptions {
            lm: LmOptions {
                max_iter: self.fit.max_iter,
                tol: self.fit.tol,
                lambda0: self.fit.lambda0,
            },
            sign: self.cavity.sign,
            min_prominence_db: self.fit.min_prominence_db,
            smooth_bins: self.fit.smooth_bins,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_matches_reference_scenario() {
        let cfg = RunConfig::from_json(PAPER_JSON).unwrap();
        assert_eq!(cfg, RunConfig::paper());
    }

    #[test]
    fn key_path_diagnostics() {
        let mut v: serde_json::Value = serde_json::from_str(PAPER_JSON).unwrap();
        v["cavity"]["delta0_hz"] = (-1.0).into();
        let err = RunConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("cavity.delta0_hz"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(PAPER_JSON).unwrap();
        v["medium"]["eta"]["m11"] = 2.0.into();
        let err = RunConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("medium.eta"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(PAPER_JSON).unwrap();
        v["medium"]["lines"][1]["gamma_hz"] = 0.0.into();
        let err = RunConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("medium.lines[1]"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(PAPER_JSON).unwrap();
        v["sweep"]["n_f"] = 1.into();
        let err = RunConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("sweep.n_f"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(PAPER_JSON).unwrap();
        v["sweep"]["b_max_t"] = (-2e-3).into();
        let err = RunConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("sweep.b_max_t"), "{err}");
    }

    #[test]
    fn unknown_keys_and_syntax_errors_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(PAPER_JSON).unwrap();
        v["cavity"]["f_c_ghz"] = 11.0.into();
        assert!(RunConfig::from_json(&v.to_string()).is_err());
        let err = RunConfig::from_json("{\n  \"medium\": ").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn single_field_sweep_is_allowed() {
        let mut cfg = RunConfig::paper();
        cfg.sweep.n_b = 1;
        cfg.sweep.b_max_t = cfg.sweep.b_min_t;
        cfg.validate().unwrap();
        assert_eq!(cfg.b_axis(), vec![cfg.sweep.b_min_t]);
    }
}
