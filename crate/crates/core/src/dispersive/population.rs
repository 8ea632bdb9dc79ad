use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, QuadOptions};

/// ⟨a†a⟩ at dimensionless time τ for a damped-exponential pulse with decay K
/// and detuning D between carrier and effective cavity line.
///
/// Written in a form that stays finite through K = 1, D = 0 and does not
/// overflow for large K·τ.
pub fn cavity_population(tau: f64, k: f64, d: f64) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid("K", format!("must be > 0, got {k}")));
    }
    if tau <= 0.0 {
        return Ok(0.0);
    }
    let a = 0.5 * (k - 1.0);
    let h = 0.5 * tau;
    let decay = (-(k + 1.0) * h).exp();
    if (a * tau).abs() < 1.0 {
        let w = a * a + d * d;
        let mix = if w == 0.0 {
            1.0
        } else {
            let sh = sinhc(a * h);
            let sc = sinc(d * h);
            (a * a * sh * sh + d * d * sc * sc) / w
        };
        Ok(0.5 * k * tau * tau * decay * mix)
    } else {
        // e^{-(K+1)τ/2}(cosh((K-1)τ/2) - 1) without forming the cosh.
        let hyper = 0.5 * ((-tau).exp() + (-k * tau).exp()) - decay;
        let trig = 2.0 * (d * h).sin().powi(2) * decay;
        Ok(k * (hyper + trig) / (a * a + d * d))
    }
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Sampled population curve on a dimensionless time axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationCurve {
    pub tau: Vec<f64>,
    pub population: Vec<f64>,
}

impl PopulationCurve {
    pub fn sample(k: f64, d: f64, taus: &[f64]) -> Result<Self> {
        let population = taus.iter().map(|&t| cavity_population(t, k, d)).collect::<Result<_>>()?;
        Ok(Self { tau: taus.to_vec(), population })
    }

    pub fn uniform(k: f64, d: f64, tau_max: f64, n: usize) -> Result<Self> {
        let n = n.max(2);
        let taus: Vec<f64> = (0..n).map(|i| tau_max * i as f64 / (n - 1) as f64).collect();
        Self::sample(k, d, &taus)
    }
}

/// Frequency window for the spectral population integral.
#[derive(Debug, Clone, Copy)]
pub struct SpectralWindow {
    pub lo: f64,
    pub hi: f64,
}

impl SpectralWindow {
    pub fn around(center: f64, half_width: f64) -> Self {
        Self { lo: center - half_width, hi: center + half_width }
    }
}

/// ⟨a†a⟩(t) = |(2π)^{-1/2}∫K(ω)ξ(ω)e^{−iωt}dω|² with the Lorentzian cavity
/// kernel K(ω) = √(κ/2)/(i(ω_eff − ω) + κ/2), by adaptive quadrature.
///
/// The integrand falls off as 1/ω², so the truncation error of the window is
/// about |spectral weight beyond the edges| / (t·half-width) for t > 0.
pub fn cavity_population_spectral<S: Fn(f64) -> Complex64>(
    spectrum: S,
    omega_eff: f64,
    kappa: f64,
    t: f64,
    window: SpectralWindow,
    opts: QuadOptions,
) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Acausal(t));
    }
    let gain = (0.5 * kappa).sqrt();
    let r = integrate(
        |w| {
            let kern = gain / Complex64::new(0.5 * kappa, omega_eff - w);
            kern * spectrum(w) * Complex64::from_polar(1.0, -w * t)
        },
        window.lo,
        window.hi,
        opts,
    )?;
    Ok(r.value.norm_sqr() / TAU)
}

/// Photon density (v = 1) in the output guide at distance `x` and time `t`:
/// κ/2 times the cavity population at the retarded time t − x.
pub fn transmitted_density<P: Fn(f64) -> f64>(x: f64, t: f64, kappa: f64, population: P) -> Result<f64> {
    if x < 0.0 {
        return Err(invalid("x", format!("position must be >= 0, got {x}")));
    }
    let retarded = t - x;
    if retarded < 0.0 {
        return Err(Error::Acausal(retarded));
    }
    Ok(0.5 * kappa * population(retarded))
}
