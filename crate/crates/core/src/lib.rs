//! Single-photon dispersive readout of a superconducting qubit.
//!
//! A qubit sits in a resonator with two waveguide ports. A single photon with
//! an exponentially damped envelope enters port I; an on–off detector on port
//! II clicks with a probability that depends on the qubit state.
//!
//! * [`dispersive`]: closed-form cavity population, click probabilities and contrast.
//! * [`transport`]: exact solution of the single/two-excitation amplitude
//!   hierarchy with Purcell decay and Bloch-Siegert corrections.
//! * [`optimizer`]: analytic parameter design and numerical maximization of the contrast.
//!
//! All frequencies are angular (rad/s); see [`units`] for conversions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dispersive;
pub mod error;
pub mod optimizer;
pub mod output;
pub mod params;
pub mod presets;
pub mod pulse;
pub mod quad;
pub mod regime;
pub mod transport;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{
    derive_couplings, make_dimensionless, Carrier, DerivedQuantities, DimensionlessGroup,
    PulseParams, PurcellRate, QubitState, SystemParams,
};
pub use pulse::{pulse_envelope, pulse_spectrum};
pub use regime::{validate_regime, validate_regime_with, RegimeReport, RegimeThresholds};
pub use transport::{ClickAccounting, ContrastResult, GrSign, KappaQ, RunResult, SolverOptions};
