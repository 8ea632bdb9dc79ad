//! Validity diagnostics for the dispersive and rotating-wave approximations.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{derive_couplings, PulseParams, SystemParams};

/// Warning thresholds. The underlying conditions are only "much less than"
/// statements, so these numbers are conventions and can be overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub four_lambda_sq: f64,
    pub lambda_ratio_sq: f64,
    pub kappa_over_omega: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { four_lambda_sq: 0.05, lambda_ratio_sq: 0.05, kappa_over_omega: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub four_lambda_sq: f64,
    /// Λ²/λ².
    pub lambda_ratio_sq: f64,
    pub kappa_over_omega_r: f64,
    pub kappa_q_over_omega_q: f64,
    pub chi_t_ph: f64,
    pub dispersive_ok: bool,
    pub bloch_siegert_ok: bool,
    pub underdamped_ok: bool,
}

impl RegimeReport {
    pub fn all_ok(&self) -> bool {
        self.dispersive_ok && self.bloch_siegert_ok && self.underdamped_ok
    }

    pub fn warnings(&self) -> Vec<&'static str> {
        let mut w = Vec::new();
        if !self.dispersive_ok {
            w.push("4λ² not small: dispersive approximation questionable");
        }
        if !self.bloch_siegert_ok {
            w.push("Λ²/λ² not small: counter-rotating corrections significant");
        }
        if !self.underdamped_ok {
            w.push("κ/ω not small: resonator close to overdamping");
        }
        w
    }
}

pub fn validate_regime(p: &SystemParams, pulse: &PulseParams) -> Result<RegimeReport> {
    validate_regime_with(p, pulse, &RegimeThresholds::default())
}

pub fn validate_regime_with(
    p: &SystemParams,
    pulse: &PulseParams,
    th: &RegimeThresholds,
) -> Result<RegimeReport> {
    let d = derive_couplings(p)?;
    let four_lambda_sq = 4.0 * d.lambda * d.lambda;
    let lambda_ratio_sq = if d.lambda == 0.0 { 0.0 } else { (d.lambda_bs / d.lambda).powi(2) };
    let kappa_over_omega_r = p.kappa / p.omega_r;
    let kappa_q_over_omega_q = d.kappa_q / p.omega_q;
    Ok(RegimeReport {
        four_lambda_sq,
        lambda_ratio_sq,
        kappa_over_omega_r,
        kappa_q_over_omega_q,
        chi_t_ph: d.chi * pulse.t_ph,
        dispersive_ok: four_lambda_sq <= th.four_lambda_sq,
        bloch_siegert_ok: lambda_ratio_sq <= th.lambda_ratio_sq,
        underdamped_ok: kappa_over_omega_r <= th.kappa_over_omega
            && kappa_q_over_omega_q <= th.kappa_over_omega,
    })
}
