//! The exponentially damped single-photon pulse in frequency and time.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::params::PulseParams;

/// Heaviside step with θ(0) = 1/2.
pub fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Lorentzian spectral amplitude ξ(ω), normalized so that ∫|ξ|²dω = 1.
pub fn pulse_spectrum(pulse: &PulseParams, omega: f64) -> Complex64 {
    let norm = 1.0 / (TAU * pulse.t_ph).sqrt();
    let phase = Complex64::from_polar(1.0, omega * pulse.t0);
    let den = Complex64::new(omega - pulse.omega_ph, 0.5 / pulse.t_ph);
    phase * norm / den
}

/// Time envelope Ξ(t) = ∫ξ(ω)e^{−iωt}dω.
///
/// Carries the factor −i√(2π/t_ph) that the transform produces, so that
/// ∫|Ξ|²dt = 2π and the waveguide drive f·Ξ has flux normalized to one photon.
pub fn pulse_envelope(pulse: &PulseParams, t: f64) -> Complex64 {
    let s = t - pulse.t0;
    let step = heaviside(s);
    if step == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let amp = (TAU / pulse.t_ph).sqrt() * step * (-0.5 * s / pulse.t_ph).exp();
    Complex64::new(0.0, -amp) * Complex64::from_polar(1.0, -pulse.omega_ph * s)
}

/// Envelope magnitude in the frame rotating at the carrier, √(2π/t_ph)·e^{−s/2t_ph}.
pub(crate) fn envelope_amplitude(t_ph: f64) -> f64 {
    (TAU / t_ph).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse() -> PulseParams {
        PulseParams::new(2.0, 1.0, 5.0).unwrap()
    }

    #[test]
    fn heaviside_half_at_origin() {
        assert_eq!(heaviside(0.0), 0.5);
        assert_eq!(heaviside(-1e-300), 0.0);
        assert_eq!(heaviside(1e-300), 1.0);
    }

    #[test]
    fn peak_and_half_width() {
        let p = pulse();
        let peak = pulse_spectrum(&p, p.omega_ph).norm_sqr();
        assert!((peak - 2.0 * p.t_ph / std::f64::consts::PI).abs() < 1e-14);
        let hw = pulse_spectrum(&p, p.omega_ph + 0.5 / p.t_ph).norm_sqr();
        assert!((peak / hw - 2.0).abs() < 1e-13);
    }

    #[test]
    fn envelope_is_causal_and_decays() {
        let p = pulse();
        assert_eq!(pulse_envelope(&p, 0.5).norm(), 0.0);
        let a = pulse_envelope(&p, p.t0 + 1e-12).norm_sqr();
        let b = pulse_envelope(&p, p.t0 + p.t_ph).norm_sqr();
        assert!((a * (-1.0f64).exp() - b).abs() < 1e-9 * a);
        let half = pulse_envelope(&p, p.t0).norm_sqr();
        assert!((half - 0.25 * TAU / p.t_ph).abs() < 1e-14);
    }
}
