//! Rotating-frame coefficient matrices of the single- and two-excitation blocks.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::params::{derive_couplings, PulseParams, SystemParams};
use crate::pulse::envelope_amplitude;

use super::expsum::{Eigen2, Mat2};

/// Sign of the Bloch-Siegert damping term in the σ₋ row, g_r = g ∓ iΛκ/2.
///
/// `Minus` follows from the Heisenberg equations of the dressed Hamiltonian
/// and is the default; `Plus` is kept for comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GrSign {
    #[default]
    Minus,
    Plus,
}

impl GrSign {
    pub(crate) fn factor(self) -> f64 {
        match self {
            GrSign::Minus => -1.0,
            GrSign::Plus => 1.0,
        }
    }
}

/// Resonator decay rate entering g_q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KappaQ {
    /// (ω_q/ω_r)κ.
    #[default]
    Scaled,
    /// κ itself; makes the single-excitation block exactly norm conserving.
    EqualKappa,
}

impl KappaQ {
    pub(crate) fn value(self, kappa: f64, scaled: f64) -> f64 {
        match self {
            KappaQ::Scaled => scaled,
            KappaQ::EqualKappa => kappa,
        }
    }
}

/// How photons reaching the detector are tallied for the excited branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ClickAccounting {
    /// Output-guide sector driven by the Purcell-dressed pair amplitudes:
    /// P = η(2N₂ + N₁) − η²N₂, where N₂ is the unsymmetrized pair weight and
    /// N₁ the single-photon-plus-excitation weight at t_m.
    #[default]
    OutputOnly,
    /// Every output photon, including pairs with one photon in the input
    /// guide: P = η⟨N_II⟩ − η²P₂ with P₂ the output-pair probability.
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub gr_sign: GrSign,
    pub kappa_q: KappaQ,
    pub accounting: ClickAccounting,
    /// Keep the counter-rotating (Λ) terms; off reduces to the Jaynes–Cummings hierarchy.
    pub bloch_siegert: bool,
    /// Send the probe photon; off leaves pure Purcell decay of the excited qubit.
    pub probe: bool,
    /// Number of samples in the returned time series (including both ends).
    pub curve_points: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gr_sign: GrSign::Minus,
            kappa_q: KappaQ::Scaled,
            accounting: ClickAccounting::OutputOnly,
            bloch_siegert: true,
            probe: true,
            curve_points: 65,
        }
    }
}

/// Everything the exponential-sum solver needs, in the frame rotating at the carrier.
#[derive(Debug, Clone)]
pub(crate) struct Hierarchy {
    pub lam: f64,
    pub lam_bs: f64,
    pub kappa: f64,
    pub eta: f64,
    /// Waveguide coupling f = √(κ/4π).
    pub f: f64,
    /// Envelope amplitude at the pulse front (zero with the probe off).
    pub xi0: f64,
    /// Amplitude decay rate 1/(2t_ph).
    pub gamma: f64,
    pub t_m: f64,
    pub e1: Eigen2,
    pub e2: Eigen2,
}

impl Hierarchy {
    pub fn new(p: &SystemParams, pulse: &PulseParams, t_m: f64, opts: &SolverOptions) -> Result<Self> {
        let d = derive_couplings(p)?;
        if pulse.t0 != 0.0 {
            return Err(invalid(
                "t0",
                "the transport solver starts counting at the pulse front; shift t_m and set t0 = 0",
            ));
        }
        if !(t_m.is_finite() && t_m > 0.0) {
            return Err(invalid("t_m", format!("must be > 0, got {t_m}")));
        }
        let lb = if opts.bloch_siegert { d.lambda_bs } else { 0.0 };
        let kappa_q = opts.kappa_q.value(p.kappa, d.kappa_q);
        let g = p.g;
        let w = pulse.omega_ph;
        let wr_bar = C64::new(p.omega_r - w, -0.5 * p.kappa);
        let wq = p.omega_q - w;
        let g_q = C64::new(g, -0.5 * lb * kappa_q);
        let g_r = C64::new(g, opts.gr_sign.factor() * 0.5 * lb * p.kappa);
        let bs = g * lb;
        let m1 = Mat2([[wr_bar - bs, g_q], [g_r, C64::from(wq + bs)]]);
        let m2 = Mat2([[2.0 * (wr_bar - bs), 2.0 * g_q], [g_r, wr_bar + wq + 2.0 * bs]]);
        Ok(Self {
            lam: d.lambda,
            lam_bs: lb,
            kappa: p.kappa,
            eta: p.eta,
            f: (p.kappa / (4.0 * PI)).sqrt(),
            xi0: if opts.probe { envelope_amplitude(pulse.t_ph) } else { 0.0 },
            gamma: 0.5 / pulse.t_ph,
            t_m,
            e1: m1.eigen()?,
            e2: m2.eigen()?,
        })
    }
}
