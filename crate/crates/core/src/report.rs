use serde::Serialize;

/// Slack on top of an analytic bound before a measured error counts as a failure.
pub const CONTRACT_SLACK: f64 = 1e-8;

/// Claimed contract of a matrix-function encoding next to what was measured.
///
/// `eps_M` and `measured_error_vs_f` are absent when there is no closed-form
/// discretization bound (general quadrature input).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub tau: f64,
    pub eta: f64,
    #[serde(rename = "eps_M")]
    pub eps_m: Option<f64>,
    #[serde(rename = "delta_L")]
    pub delta_l: f64,
    pub degree_d: usize,
    pub alpha_prime: f64,
    pub beta_prime: f64,
    #[serde(rename = "measured_error_vs_fM")]
    pub measured_error_vs_fm: f64,
    pub measured_error_vs_f: Option<f64>,
    pub pass: bool,
}

impl VerificationReport {
    /// Recomputes `pass` from the stored numbers.
    pub fn evaluate(mut self) -> Self {
        let quadrature_ok = self.measured_error_vs_fm <= self.eta + CONTRACT_SLACK;
        let function_ok = match (self.measured_error_vs_f, self.eps_m) {
            (Some(err), Some(eps)) => err <= self.eta + eps + CONTRACT_SLACK,
            _ => true,
        };
        self.pass = quadrature_ok && function_ok;
        self
    }
}
