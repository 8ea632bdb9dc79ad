use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::DimensionlessGroup;
use crate::quad::{integrate_real, QuadOptions};

use super::population::cavity_population;

/// Detuning branch of a click probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Branch {
    /// Carrier on the cavity line, D = 0.
    Resonant,
    /// Carrier 2χ away from the cavity line, D = 2X.
    Detuned,
    /// Arbitrary dimensionless detuning D.
    General(f64),
}

impl Branch {
    pub fn detuning(self, x: f64) -> f64 {
        match self {
            Branch::Resonant => 0.0,
            Branch::Detuned => 2.0 * x,
            Branch::General(d) => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Counting {
    Infinite,
    /// Counting stops at dimensionless time τ_m after the pulse front.
    Finite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickProbability {
    pub value: f64,
    pub branch: Branch,
    pub counting: Counting,
}

fn check(k: f64, x: f64, eta: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid("K", format!("must be > 0, got {k}")));
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(invalid("X", format!("must be >= 0, got {x}")));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", format!("must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

/// ηK(K+1)/((K+1)² + 4D²); reduces to ηK/(K+1) at D = 0 and to
/// ηK(K+1)/((K+1)² + 16X²) at D = 2X.
fn infinite_value(k: f64, d: f64, eta: f64) -> f64 {
    let kp = k + 1.0;
    eta * k * kp / (kp * kp + 4.0 * d * d)
}

pub fn click_probability_infinite(k: f64, x: f64, branch: Branch, eta: f64) -> Result<ClickProbability> {
    check(k, x, eta)?;
    Ok(ClickProbability {
        value: infinite_value(k, branch.detuning(x), eta),
        branch,
        counting: Counting::Infinite,
    })
}

pub fn click_probability(
    k: f64,
    x: f64,
    branch: Branch,
    eta: f64,
    counting: Counting,
) -> Result<ClickProbability> {
    check(k, x, eta)?;
    let d = branch.detuning(x);
    let value = match counting {
        Counting::Infinite => infinite_value(k, d, eta),
        Counting::Finite(tm) => eta * (infinite_value(k, d, 1.0) - finite_time_delta(k, d, tm)?),
    };
    Ok(ClickProbability { value: value.max(0.0), branch, counting })
}

/// Click probability (η = 1) lost by stopping the count at τ_m:
/// Δ(τ_m) = (K/2)∫_{τ_m}^∞ ⟨a†a⟩dτ.
pub fn finite_time_delta(k: f64, d: f64, tau_m: f64) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid("K", format!("must be > 0, got {k}")));
    }
    if !(tau_m >= 0.0) {
        return Err(invalid("tau_m", format!("must be >= 0, got {tau_m}")));
    }
    if tau_m.is_infinite() {
        return Ok(0.0);
    }
    let km = k - 1.0;
    let kp = k + 1.0;
    let den = km * km + 4.0 * d * d;
    if den < 1e-6 {
        // The closed form is 0/0 here; integrate the (regularised) population.
        let span = 80.0 / k.min(1.0);
        let tail = integrate_real(
            |t| cavity_population(t, k, d).unwrap_or(0.0),
            tau_m,
            tau_m + span,
            QuadOptions::default(),
        )?;
        return Ok(0.5 * k * tail);
    }
    let (s, c) = (d * tau_m).sin_cos();
    let smooth = (k * (-tau_m).exp() + (-k * tau_m).exp()) / (2.0 * k);
    let osc = 2.0 * (-0.5 * kp * tau_m).exp() * (kp * c - 2.0 * d * s) / (kp * kp + 4.0 * d * d);
    Ok((2.0 * k * k / den * (smooth - osc)).max(0.0))
}

/// (1 + 2/K)e^{−τ_m}: the leading behaviour of Δ at D = 0 for large K.
pub fn finite_time_delta_approx(k: f64, tau_m: f64) -> f64 {
    (1.0 + 2.0 / k) * (-tau_m).exp()
}

/// Contrast for a probe centred on the excited-state line:
/// P(D = 0) − P(D = 2X), optionally with finite counting time τ_m.
pub fn contrast_dispersive(k: f64, x: f64, eta: f64, tau_m: Option<f64>) -> Result<f64> {
    let counting = tau_m.map_or(Counting::Infinite, Counting::Finite);
    let up = click_probability(k, x, Branch::Resonant, eta, counting)?;
    let down = click_probability(k, x, Branch::Detuned, eta, counting)?;
    Ok(up.value - down.value)
}

/// Contrast for an arbitrary carrier, using the group's D_up and D_down.
pub fn contrast_for_group(g: &DimensionlessGroup, eta: f64, tau_m: Option<f64>) -> Result<f64> {
    let counting = tau_m.map_or(Counting::Infinite, Counting::Finite);
    let up = click_probability(g.k, g.x, Branch::General(g.d_up), eta, counting)?;
    let down = click_probability(g.k, g.x, Branch::General(g.d_down), eta, counting)?;
    Ok(up.value - down.value)
}

/// K maximizing the infinite-time contrast at fixed X.
pub fn optimal_cavity_decay(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(invalid("X", format!("must be > 0, got {x}")));
    }
    let s = 16.0 * x * x + 1.0;
    let u = (x * s.sqrt() + s / 4.0 - 0.125).cbrt();
    Ok(u + 1.0 / (4.0 * u) - 0.5)
}

/// Large-X asymptote 2X^{2/3} of [`optimal_cavity_decay`].
pub fn optimal_cavity_decay_asymptote(x: f64) -> f64 {
    2.0 * x.powf(2.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxContrast {
    pub value: f64,
    /// False when X < 100, where the neglected terms exceed 0.1%.
    pub valid: bool,
}

/// η(1 − 3/(2K)), accurate at the optimal K once X ≳ 100.
pub fn contrast_approx(k: f64, x: f64, eta: f64) -> ApproxContrast {
    ApproxContrast { value: eta * (1.0 - 1.5 / k), valid: x >= 100.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_at_zero_is_whole_click() {
        for &(k, d) in &[(4.27, 0.0), (4.27, 7.28), (0.3, 1.0), (50.0, 0.2)] {
            let full = infinite_value(k, d, 1.0);
            assert!((finite_time_delta(k, d, 0.0).unwrap() - full).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_singular_point_matches_neighbourhood() {
        let at = finite_time_delta(1.0, 0.0, 2.0).unwrap();
        let near = finite_time_delta(1.0 + 2e-3, 0.0, 2.0).unwrap();
        assert!((at - near).abs() < 1e-3);
    }

    #[test]
    fn optimal_k_known_value() {
        let k = optimal_cavity_decay(10.0).unwrap();
        assert!((k - 8.81).abs() < 0.01, "{k}");
        assert!((optimal_cavity_decay_asymptote(10.0) - 9.28).abs() < 0.01);
    }
}
