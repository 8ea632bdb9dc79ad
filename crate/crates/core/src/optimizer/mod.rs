//! Parameter design: the analytic chain from a target error to a parameter
//! set, and numerical maximization of the contrast over (g, κ).

mod nelder_mead;
mod plan;
mod search;

pub use nelder_mead::{minimize, NmOptions, NmResult};
pub use plan::{
    analytic_plan, analytic_plan_with, coupling_for, min_pulse_duration, pull_for_optimal_decay,
    resonator_frequency, DesignTargets, MinPulse, ParameterPlan, PlanResiduals, PulseRule,
};
pub use search::{
    cmax_curve, contrast_map, evaluate, numeric_optimize, refine_from, Bounds, ContrastMap, Curve,
    CurvePoint, Evaluator, MapCell, OptimizeOptions, OptimumPoint, Range, Schedule, Sweep,
};
