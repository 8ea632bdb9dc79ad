//! Analytic parameter chain: from a target readout error to a full parameter set.

use serde::{Deserialize, Serialize};

use crate::dispersive::{contrast_dispersive, optimal_cavity_decay};
use crate::error::{invalid, Error, Result};
use crate::params::{derive_couplings, PulseParams, SystemParams};
use crate::regime::RegimeThresholds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignTargets {
    /// Target readout error ε = (1 − C)/2.
    pub epsilon: f64,
    /// λ/Λ = (ω_q + ω_r)/(ω_q − ω_r).
    pub ratio_lambda_lambda_bs: f64,
    pub omega_q: f64,
    /// t_m/t_ph.
    pub ratio_tm_tph: f64,
    /// t_m/T_Purcell.
    pub ratio_tm_tp: f64,
}

impl DesignTargets {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(invalid("epsilon", format!("must lie in (0, 0.5), got {}", self.epsilon)));
        }
        if !(self.ratio_lambda_lambda_bs > 1.0) {
            return Err(invalid("ratio_lambda_lambda_bs", "must exceed 1"));
        }
        for (name, v) in [("omega_q", self.omega_q), ("ratio_tm_tph", self.ratio_tm_tph), ("ratio_tm_tp", self.ratio_tm_tp)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// T_Purcell/t_ph implied by the two time ratios.
    pub fn purcell_over_tph(&self) -> f64 {
        self.ratio_tm_tph / self.ratio_tm_tp
    }
}

/// How t_ph is fixed once λ and the frequencies are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PulseRule {
    /// Choose X so that the exact optimal K equals t_ph/(T_Purcell λ²). Every
    /// defining relation of the plan then holds to rounding.
    #[default]
    Exact,
    /// The large-X closed form t_ph = (λ/2Λ)(t_ph/2T_P)^{3/2}/(λ⁵ω_q), with κ
    /// then taken from the exact optimal K; T_Purcell drifts from its target
    /// ratio by the asymptote's error.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterPlan {
    pub system: SystemParams,
    pub pulse: PulseParams,
    pub t_m: f64,
    pub lambda: f64,
    pub lambda_bs: f64,
    pub chi: f64,
    pub k: f64,
    pub x: f64,
    pub t_purcell: f64,
    /// Dispersive contrast with finite counting at t_m.
    pub predicted_c_d: f64,
    pub targets: DesignTargets,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanResiduals {
    /// Relative error of ε re-derived as (3T_P/4t_ph)λ².
    pub epsilon: f64,
    /// Relative error of K against K_opt(X).
    pub k_opt: f64,
    /// Relative error of t_m/T_Purcell against its target.
    pub tm_tp: f64,
    /// Relative error of λ/Λ against its target.
    pub ratio: f64,
}

impl PlanResiduals {
    pub fn max(&self) -> f64 {
        self.epsilon.abs().max(self.k_opt.abs()).max(self.tm_tp.abs()).max(self.ratio.abs())
    }
}

impl ParameterPlan {
    /// Re-derives the defining relations from the emitted parameters alone.
    pub fn residuals(&self) -> Result<PlanResiduals> {
        let d = derive_couplings(&self.system)?;
        let t_ph = self.pulse.t_ph;
        let eps = 0.75 * d.t_purcell / t_ph * d.lambda * d.lambda;
        let k = self.system.kappa * t_ph;
        let k_opt = optimal_cavity_decay(d.chi * t_ph)?;
        let rel = |a: f64, b: f64| (a - b) / b;
        Ok(PlanResiduals {
            epsilon: rel(eps, self.targets.epsilon),
            k_opt: rel(k, k_opt),
            tm_tp: rel(self.t_m / d.t_purcell, self.targets.ratio_tm_tp),
            ratio: rel(d.lambda / d.lambda_bs, self.targets.ratio_lambda_lambda_bs),
        })
    }
}

/// t_ph ≥ (1/χ)(3/(8ε))^{3/2}: shortest pulse reaching error ε at the optimal K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinPulse {
    pub t_ph: f64,
    /// The bound assumes a perfect detector; false when η ≠ 1.
    pub valid: bool,
}

pub fn min_pulse_duration(epsilon: f64, chi: f64, eta: f64) -> Result<MinPulse> {
    if !(epsilon > 0.0 && epsilon < 0.375) {
        return Err(invalid("epsilon", format!("must lie in (0, 3/8), got {epsilon}")));
    }
    if !(chi > 0.0) {
        return Err(invalid("chi", format!("must be > 0, got {chi}")));
    }
    Ok(MinPulse { t_ph: (0.375 / epsilon).powf(1.5) / chi, valid: eta == 1.0 })
}

/// ω_r = ω_q(r − 1)/(r + 1) for r = λ/Λ.
pub fn resonator_frequency(ratio: f64, omega_q: f64) -> f64 {
    omega_q * (ratio - 1.0) / (ratio + 1.0)
}

/// g = 2λω_q/(r + 1).
pub fn coupling_for(lambda: f64, ratio: f64, omega_q: f64) -> f64 {
    2.0 * lambda * omega_q / (ratio + 1.0)
}

/// X at which the optimal K equals `k`: X = (K + 1)√(2K − 1)/4.
///
/// Obtained by setting ∂C/∂K = 0 and solving for X²; the other root is X = 0.
pub fn pull_for_optimal_decay(k: f64) -> Result<f64> {
    if !(k > 0.5) {
        return Err(invalid("K", format!("an optimal K must exceed 1/2, got {k}")));
    }
    Ok(0.25 * (k + 1.0) * (2.0 * k - 1.0).sqrt())
}

pub fn analytic_plan(targets: &DesignTargets) -> Result<ParameterPlan> {
    analytic_plan_with(targets, PulseRule::Exact, &RegimeThresholds::default())
}

pub fn analytic_plan_with(targets: &DesignTargets, rule: PulseRule, th: &RegimeThresholds) -> Result<ParameterPlan> {
    targets.validate()?;
    let rho = targets.purcell_over_tph();
    let lambda = (4.0 * targets.epsilon / (3.0 * rho)).sqrt();
    if 4.0 * lambda * lambda > th.four_lambda_sq {
        return Err(Error::Infeasible(format!(
            "ε = {} needs λ = {lambda:.4}, i.e. 4λ² = {:.4} above the dispersive threshold {}",
            targets.epsilon,
            4.0 * lambda * lambda,
            th.four_lambda_sq
        )));
    }
    let r = targets.ratio_lambda_lambda_bs;
    let wq = targets.omega_q;
    let wr = resonator_frequency(r, wq);
    let g = coupling_for(lambda, r, wq);
    // χ = g(λ + Λ) = 2λ²ω_q/r
    let chi = g * (lambda + lambda / r);

    let (t_ph, k) = match rule {
        PulseRule::Exact => {
            let k = 1.0 / (rho * lambda * lambda);
            (pull_for_optimal_decay(k)? / chi, k)
        }
        PulseRule::Asymptotic => {
            // t_ph = (r/2)(t_ph/2T_P)^{3/2}/(λ⁵ω_q) with T_P = ρ t_ph
            let t = 0.5 * r * (0.5 / rho).powf(1.5) / (lambda.powi(5) * wq);
            (t, optimal_cavity_decay(chi * t)?)
        }
    };
    let kappa = k / t_ph;
    let system = SystemParams::new(wq, wr, g, kappa, 1.0)?;
    let d = derive_couplings(&system)?;
    let pulse = PulseParams::new(t_ph, 0.0, d.omega_eff_up)?;
    let t_m = targets.ratio_tm_tph * t_ph;
    let x = d.chi * t_ph;
    Ok(ParameterPlan {
        system,
        pulse,
        t_m,
        lambda: d.lambda,
        lambda_bs: d.lambda_bs,
        chi: d.chi,
        k,
        x,
        t_purcell: d.t_purcell,
        predicted_c_d: contrast_dispersive(k, x, 1.0, Some(targets.ratio_tm_tph))?,
        targets: *targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ghz;

    #[test]
    fn inverse_of_optimal_decay() {
        for &x in &[0.5, 3.64, 10.0, 1000.0] {
            let k = optimal_cavity_decay(x).unwrap();
            let back = pull_for_optimal_decay(k).unwrap();
            assert!((back - x).abs() < 1e-10 * x, "{x} -> {k} -> {back}");
        }
    }

    #[test]
    fn asymptotic_rule_close_to_exact_at_large_x() {
        let t = DesignTargets { epsilon: 0.003, ratio_lambda_lambda_bs: 10.0, omega_q: ghz(5.0), ratio_tm_tph: 7.0, ratio_tm_tp: 0.1 };
        let a = analytic_plan_with(&t, PulseRule::Asymptotic, &RegimeThresholds::default()).unwrap();
        let e = analytic_plan(&t).unwrap();
        assert!((a.pulse.t_ph / e.pulse.t_ph - 1.0).abs() < 0.05);
    }
}
