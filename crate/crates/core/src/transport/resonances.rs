use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{derive_couplings, SystemParams};

use super::model::{GrSign, KappaQ};

/// Complex single-excitation resonances of the open qubit–resonator system.
///
/// `e_plus` takes the principal square root, so for ω_q > ω_r it is the
/// qubit-like root. [`ComplexResonances::qubit_like`] picks by proximity to
/// ω_q instead of relying on that ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexResonances {
    pub omega_r_bar: C64,
    pub g_q: C64,
    pub g_r: C64,
    pub e_plus: C64,
    pub e_minus: C64,
    omega_q: f64,
}

impl ComplexResonances {
    pub fn qubit_like(&self) -> C64 {
        if (self.e_plus.re - self.omega_q).abs() <= (self.e_minus.re - self.omega_q).abs() {
            self.e_plus
        } else {
            self.e_minus
        }
    }

    pub fn cavity_like(&self) -> C64 {
        if self.qubit_like() == self.e_plus {
            self.e_minus
        } else {
            self.e_plus
        }
    }

    /// Energy decay rate −2 Im E of the qubit-like mode.
    pub fn qubit_decay_rate(&self) -> f64 {
        -2.0 * self.qubit_like().im
    }
}

pub fn resonances(p: &SystemParams) -> Result<ComplexResonances> {
    resonances_with(p, GrSign::default(), KappaQ::default())
}

pub fn resonances_with(p: &SystemParams, sign: GrSign, kq: KappaQ) -> Result<ComplexResonances> {
    let d = derive_couplings(p)?;
    let lb = d.lambda_bs;
    let kappa_q = kq.value(p.kappa, d.kappa_q);
    let omega_r_bar = C64::new(p.omega_r, -0.5 * p.kappa);
    let g_q = C64::new(p.g, -0.5 * lb * kappa_q);
    let g_r = C64::new(p.g, sign.factor() * 0.5 * lb * p.kappa);
    let half_sum = 0.5 * (omega_r_bar + p.omega_q);
    let half_diff = 0.5 * (omega_r_bar - p.omega_q) - p.g * lb;
    let root = (g_r * g_q + half_diff * half_diff).sqrt();
    Ok(ComplexResonances {
        omega_r_bar,
        g_q,
        g_r,
        e_plus: half_sum + root,
        e_minus: half_sum - root,
        omega_q: p.omega_q,
    })
}
