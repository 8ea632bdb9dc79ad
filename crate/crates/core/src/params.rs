//! Parameter records and the quantities derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Physical parameters of the qubit, the resonator and the detector.
///
/// Frequencies and rates are angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_q: f64,
    pub omega_r: f64,
    pub g: f64,
    pub kappa: f64,
    pub eta: f64,
}

impl SystemParams {
    /// Validating constructor.
    ///
    /// `g = 0` is accepted so that the decoupled limit can be evaluated; every
    /// other rate must be strictly positive.
    pub fn new(omega_q: f64, omega_r: f64, g: f64, kappa: f64, eta: f64) -> Result<Self> {
        let p = Self { omega_q, omega_r, g, kappa, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega_q", self.omega_q)?;
        positive("omega_r", self.omega_r)?;
        positive("kappa", self.kappa)?;
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(invalid("g", format!("must be finite and >= 0, got {}", self.g)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(invalid("eta", format!("must lie in [0, 1], got {}", self.eta)));
        }
        if self.omega_q == self.omega_r {
            return Err(Error::Degenerate);
        }
        Ok(())
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    /// Multiplies every rate by `s`.
    pub fn scaled(self, s: f64) -> Self {
        Self {
            omega_q: self.omega_q * s,
            omega_r: self.omega_r * s,
            g: self.g * s,
            kappa: self.kappa * s,
            eta: self.eta,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Which resonator decay rate sets the Purcell lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PurcellRate {
    /// 1/(κλ²), assuming κ_q ≈ κ.
    #[default]
    Kappa,
    /// 1/(κ_qλ²).
    KappaQ,
}

/// Couplings and shifts that follow from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// Dispersive ratio g/(ω_q − ω_r).
    pub lambda: f64,
    /// Bloch-Siegert ratio g/(ω_q + ω_r).
    pub lambda_bs: f64,
    /// Total cavity pull g(λ + Λ).
    pub chi: f64,
    /// Resonator decay rate seen by the qubit, (ω_q/ω_r)κ.
    pub kappa_q: f64,
    /// Purcell lifetime 1/(κλ²); infinite at g = 0.
    pub t_purcell: f64,
    pub omega_eff_up: f64,
    pub omega_eff_down: f64,
}

impl DerivedQuantities {
    pub fn t_purcell_for(&self, rate: PurcellRate) -> f64 {
        match rate {
            PurcellRate::Kappa => self.t_purcell,
            PurcellRate::KappaQ if self.lambda == 0.0 => f64::INFINITY,
            PurcellRate::KappaQ => 1.0 / (self.kappa_q * self.lambda * self.lambda),
        }
    }

    pub fn omega_eff(&self, state: QubitState) -> f64 {
        match state {
            QubitState::Up => self.omega_eff_up,
            QubitState::Down => self.omega_eff_down,
        }
    }
}

pub fn derive_couplings(p: &SystemParams) -> Result<DerivedQuantities> {
    p.validate()?;
    let lambda = p.g / (p.omega_q - p.omega_r);
    let lambda_bs = p.g / (p.omega_q + p.omega_r);
    let chi = p.g * (lambda + lambda_bs);
    let t_purcell = if lambda == 0.0 { f64::INFINITY } else { 1.0 / (p.kappa * lambda * lambda) };
    Ok(DerivedQuantities {
        lambda,
        lambda_bs,
        chi,
        kappa_q: p.omega_q / p.omega_r * p.kappa,
        t_purcell,
        omega_eff_up: p.omega_r + chi,
        omega_eff_down: p.omega_r - chi,
    })
}

/// Exponentially damped single-photon pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    /// Duration t_ph (s); the intensity decays as e^{−t/t_ph}.
    pub t_ph: f64,
    /// Arrival time of the pulse front at the cavity (s).
    pub t0: f64,
    /// Carrier angular frequency (rad/s).
    pub omega_ph: f64,
}

impl PulseParams {
    pub fn new(t_ph: f64, t0: f64, omega_ph: f64) -> Result<Self> {
        positive("t_ph", t_ph)?;
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(invalid("t0", format!("must be finite and >= 0, got {t0}")));
        }
        positive("omega_ph", omega_ph)?;
        Ok(Self { t_ph, t0, omega_ph })
    }

    /// Pulse centred on the cavity line for the excited qubit, ω_r + χ.
    pub fn resonant_up(p: &SystemParams, t_ph: f64, t0: f64) -> Result<Self> {
        let d = derive_couplings(p)?;
        Self::new(t_ph, t0, d.omega_eff_up)
    }
}

/// Carrier choice as written in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Carrier {
    ResonantUp,
    Fixed(f64),
}

impl Carrier {
    pub fn resolve(self, p: &SystemParams) -> Result<f64> {
        match self {
            Carrier::ResonantUp => Ok(derive_couplings(p)?.omega_eff_up),
            Carrier::Fixed(w) => Ok(w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitState {
    Up,
    Down,
}

/// Dimensionless reduction (τ, K, X, D) of a readout scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessGroup {
    pub k: f64,
    pub x: f64,
    pub d_up: f64,
    pub d_down: f64,
    t0: f64,
    t_ph: f64,
}

impl DimensionlessGroup {
    pub fn tau_of(&self, t: f64) -> f64 {
        (t - self.t0) / self.t_ph
    }

    pub fn d(&self, state: QubitState) -> f64 {
        match state {
            QubitState::Up => self.d_up,
            QubitState::Down => self.d_down,
        }
    }
}

pub fn make_dimensionless(p: &SystemParams, pulse: &PulseParams) -> Result<DimensionlessGroup> {
    let d = derive_couplings(p)?;
    let t = pulse.t_ph;
    Ok(DimensionlessGroup {
        k: p.kappa * t,
        x: d.chi * t,
        d_up: (d.omega_eff_up - pulse.omega_ph) * t,
        d_down: (d.omega_eff_down - pulse.omega_ph) * t,
        t0: pulse.t0,
        t_ph: t,
    })
}
