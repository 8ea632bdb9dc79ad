use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::{PulseParams, SystemParams};

use super::kgrid::{grid_contrast, KGrid};
use super::model::SolverOptions;
use super::solver::contrast_point;

/// Successive C_n changes below this count as converged (0.05 percentage points).
pub const CONVERGED_DELTA: f64 = 5e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub nodes: usize,
    pub span: f64,
    pub c_n: f64,
    pub p_up: f64,
    /// Change in C_n from the previous level.
    pub delta: Option<f64>,
    /// Grid C_n minus the exact value.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub exact_c_n: f64,
    pub exact_p_up: f64,
    pub levels: Vec<ConvergenceLevel>,
    pub converged: bool,
    /// False when the error against the exact value grew between levels.
    pub monotone: bool,
    /// Finest level within [`CONVERGED_DELTA`] of the exact value.
    pub within_exact: bool,
}

/// Grid-quadrature C_n and P↑ under successive refinement.
///
/// Each level doubles the nodes per cluster and the span factor. The exact
/// exponential-sum result is the limit the levels should approach.
pub fn grid_convergence(
    p: &SystemParams,
    pulse: &PulseParams,
    t_m: f64,
    opts: &SolverOptions,
    levels: usize,
    base_nodes: usize,
    base_span: f64,
) -> Result<ConvergenceReport> {
    if levels < 2 {
        return Err(invalid("levels", "need at least two refinement levels"));
    }
    let (exact_c_n, exact_p_up) = contrast_point(p, pulse, t_m, opts)?;
    let mut out: Vec<ConvergenceLevel> = Vec::with_capacity(levels);
    for l in 0..levels {
        let scale = (1usize << l) as f64;
        let grid = KGrid::for_run(p, pulse, t_m, opts, base_nodes << l, base_span * scale)?;
        grid.check_coverage(p, pulse, t_m, opts)?;
        let (c_n, p_up) = grid_contrast(p, pulse, t_m, opts, &grid)?;
        let delta = out.last().map(|prev| c_n - prev.c_n);
        out.push(ConvergenceLevel { nodes: grid.len(), span: grid.span(), c_n, p_up, delta, error: c_n - exact_c_n });
    }
    let converged = out.last().and_then(|l| l.delta).is_some_and(|d| d.abs() < CONVERGED_DELTA);
    let monotone = out.windows(2).all(|w| w[1].error.abs() <= w[0].error.abs() * 1.05 + 1e-9);
    let within_exact = out.last().is_some_and(|l| l.error.abs() < CONVERGED_DELTA);
    Ok(ConvergenceReport { exact_c_n, exact_p_up, levels: out, converged, monotone, within_exact })
}
