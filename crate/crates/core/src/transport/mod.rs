//! Beyond-dispersive transport: the qubit and resonator exchange excitations,
//! the qubit Purcell-decays, and the counter-rotating (Λ) corrections are kept
//! to first order.

mod convergence;
pub mod expsum;
mod kgrid;
mod model;
mod resonances;
mod solver;

pub use convergence::{grid_convergence, ConvergenceLevel, ConvergenceReport, CONVERGED_DELTA};
pub use kgrid::{
    grid_contrast, single_excitation_state, two_excitation_state, Cluster, KGrid,
    SingleExcitationState, TwoExcitationState,
};
pub use model::{ClickAccounting, GrSign, KappaQ, SolverOptions};
pub use resonances::{resonances, resonances_with, ComplexResonances};
pub use solver::{
    contrast_point, full_contrast, solve_excited, solve_ground, ContrastResult, RunMeta, RunResult,
    TimePoint,
};
