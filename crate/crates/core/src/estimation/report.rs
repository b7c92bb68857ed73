use serde::{Deserialize, Serialize};

/// Recovered doublet parameters. Field-dependent entries are `None` for a
/// single-trace fit; `ratio_g_delta` needs a trace-fitted `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub g_hz: f64,
    pub g_sigma_hz: f64,
    /// Half-width at half-maximum.
    pub delta_hz: Option<f64>,
    pub delta_sigma_hz: Option<f64>,
    pub b0_t: Option<f64>,
    pub b0_sigma_t: Option<f64>,
    pub slope_hz_per_t: Option<f64>,
    pub slope_sigma_hz_per_t: Option<f64>,
    pub f_c_hz: f64,
    pub f_c_sigma_hz: f64,
    pub ratio_g_delta: Option<f64>,
    pub covariance_params: Vec<String>,
    pub covariance: Vec<Vec<f64>>,
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_rows_used: usize,
    pub n_rows_excluded: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl FitReport {
    /// One-line human summary.
    pub fn summary(&self) -> String {
        let mut s = format!("g = {:.1} Hz", self.g_hz);
        if let Some(d) = self.delta_hz {
            s += &format!(", delta = {d:.1} Hz");
        }
        if let Some(r) = self.ratio_g_delta {
            s += &format!(", g/delta = {r:.3}");
        }
        if let Some(b0) = self.b0_t {
            s += &format!(", b0 = {:.4} mT", b0 * 1e3);
        }
        s
    }
}
