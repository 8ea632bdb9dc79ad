//! Numerical maximization of the contrast over (g, κ): maps, direct search
//! and C_max curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{minimize, NmOptions};
use crate::dispersive::contrast_dispersive;
use crate::error::{invalid, Error, Result};
use crate::params::{derive_couplings, PulseParams, SystemParams};
use crate::transport::{contrast_point, SolverOptions};

/// Which contrast model a map or search evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Evaluator {
    Full(SolverOptions),
    /// Closed-form C_d with finite counting. P↑ is the Purcell estimate e^{−t_m/T_P}.
    Dispersive,
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator::Full(SolverOptions::default())
    }
}

/// Counting window and pulse length. The carrier always sits on ω_r + χ of
/// the point being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t_m: f64,
    pub tm_over_tph: f64,
}

impl Schedule {
    pub fn new(t_m: f64, tm_over_tph: f64) -> Result<Self> {
        if !(t_m.is_finite() && t_m > 0.0) {
            return Err(invalid("t_m", format!("must be > 0, got {t_m}")));
        }
        if !(tm_over_tph.is_finite() && tm_over_tph > 0.0) {
            return Err(invalid("tm_over_tph", format!("must be > 0, got {tm_over_tph}")));
        }
        Ok(Self { t_m, tm_over_tph })
    }

    pub fn t_ph(&self) -> f64 {
        self.t_m / self.tm_over_tph
    }

    pub fn pulse(&self, p: &SystemParams) -> Result<PulseParams> {
        PulseParams::resonant_up(p, self.t_ph(), 0.0)
    }
}

/// (C, P↑) at one parameter point.
pub fn evaluate(p: &SystemParams, schedule: &Schedule, eval: &Evaluator) -> Result<(f64, f64)> {
    let pulse = schedule.pulse(p)?;
    match eval {
        Evaluator::Full(opts) => contrast_point(p, &pulse, schedule.t_m, opts),
        Evaluator::Dispersive => {
            let d = derive_couplings(p)?;
            let t_ph = pulse.t_ph;
            let c = contrast_dispersive(p.kappa * t_ph, d.chi * t_ph, p.eta, Some(schedule.tm_over_tph))?;
            Ok((c, (-schedule.t_m / d.t_purcell).exp()))
        }
    }
}

/// Inclusive linear range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let r = Self { lo, hi, n };
        r.validate("range")?;
        Ok(r)
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo > 0.0 && self.hi > self.lo) {
            return Err(invalid(name, format!("need 0 < lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if self.n < 2 {
            return Err(invalid(name, "need at least 2 points"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 }).collect()
    }

    fn log_values(&self) -> Vec<f64> {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let last = self.n - 1;
        (0..self.n)
            .map(|i| match i {
                0 => self.lo,
                i if i == last => self.hi,
                i => (a + (b - a) * i as f64 / last as f64).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub g: f64,
    pub kappa: f64,
    pub c_n: f64,
    pub p_up: f64,
    pub valid: bool,
    /// Solver diagnostic for invalid cells.
    pub error: Option<String>,
}

impl MapCell {
    fn at(p_base: &SystemParams, g: f64, kappa: f64, schedule: &Schedule, eval: &Evaluator) -> Self {
        let p = p_base.with_g(g).with_kappa(kappa);
        match p.validate().and_then(|_| evaluate(&p, schedule, eval)) {
            Ok((c_n, p_up)) => MapCell { g, kappa, c_n, p_up, valid: true, error: None },
            Err(e) => MapCell { g, kappa, c_n: f64::NAN, p_up: f64::NAN, valid: false, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastMap {
    pub g_values: Vec<f64>,
    pub kappa_values: Vec<f64>,
    /// Row-major: `cells[i * kappa_values.len() + j]` is (g_i, κ_j).
    pub cells: Vec<MapCell>,
}

impl ContrastMap {
    pub fn cell(&self, i: usize, j: usize) -> &MapCell {
        &self.cells[i * self.kappa_values.len() + j]
    }

    /// (i, j) of the best valid cell; ties resolve to the first in row-major order.
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let nk = self.kappa_values.len();
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.valid)
            .fold(None, |best: Option<(usize, f64)>, (idx, c)| match best {
                Some((_, v)) if v >= c.c_n => best,
                _ => Some((idx, c.c_n)),
            })
            .map(|(idx, _)| (idx / nk, idx % nk))
    }

    pub fn best(&self) -> Option<&MapCell> {
        self.argmax().map(|(i, j)| self.cell(i, j))
    }

    /// True when the maximum is not on the range boundary.
    pub fn max_is_interior(&self) -> bool {
        match self.argmax() {
            Some((i, j)) => i > 0 && j > 0 && i + 1 < self.g_values.len() && j + 1 < self.kappa_values.len(),
            None => false,
        }
    }
}

/// Evaluates every (g, κ) cell in parallel on the current rayon pool.
///
/// Cells are independent pure evaluations collected in index order, so the
/// result does not depend on the number of workers.
pub fn contrast_map(
    p_base: &SystemParams,
    schedule: &Schedule,
    g_range: Range,
    kappa_range: Range,
    eval: &Evaluator,
) -> Result<ContrastMap> {
    g_range.validate("g_range")?;
    kappa_range.validate("kappa_range")?;
    if g_range.n < 8 || kappa_range.n < 8 {
        return Err(invalid("resolution", format!("need at least 8x8, got {}x{}", g_range.n, kappa_range.n)));
    }
    Ok(map_over(p_base, schedule, g_range.values(), kappa_range.values(), eval))
}

fn map_over(p_base: &SystemParams, schedule: &Schedule, gs: Vec<f64>, ks: Vec<f64>, eval: &Evaluator) -> ContrastMap {
    let nk = ks.len();
    let cells = (0..gs.len() * nk)
        .into_par_iter()
        .map(|idx| MapCell::at(p_base, gs[idx / nk], ks[idx % nk], schedule, eval))
        .collect();
    ContrastMap { g_values: gs, kappa_values: ks, cells }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub g: (f64, f64),
    pub kappa: (f64, f64),
}

impl Bounds {
    pub fn new(g: (f64, f64), kappa: (f64, f64)) -> Result<Self> {
        let b = Self { g, kappa };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("g bounds", self.g), ("kappa bounds", self.kappa)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
                return Err(invalid(name, format!("need 0 < lo < hi, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn contains(&self, g: f64, kappa: f64) -> bool {
        (self.g.0..=self.g.1).contains(&g) && (self.kappa.0..=self.kappa.1).contains(&kappa)
    }

    fn snap_g(&self, g: f64) -> f64 {
        snap(g, self.g)
    }

    fn snap_kappa(&self, kappa: f64) -> f64 {
        snap(kappa, self.kappa)
    }

    /// Scales the g interval, keeping κ.
    pub fn scale_g(self, s: f64) -> Self {
        Self { g: (self.g.0 * s, self.g.1 * s), kappa: self.kappa }
    }
}

fn snap(x: f64, (lo, hi): (f64, f64)) -> f64 {
    const REL: f64 = 1e-12;
    if x < lo && x > lo * (1.0 - REL) {
        lo
    } else if x > hi && x < hi * (1.0 + REL) {
        hi
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub evaluator: Evaluator,
    /// Coarse log-spaced grid is `coarse × coarse`.
    pub coarse: usize,
    pub simplex: NmOptions,
    /// Relative step of the final axis polish; the result is not beaten by
    /// any of its four ±step neighbours.
    pub polish_step: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            evaluator: Evaluator::default(),
            coarse: 12,
            // 0.02 pp
            simplex: NmOptions { f_tol: 2e-4, x_tol: 5e-3, max_evals: 300 },
            polish_step: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumPoint {
    pub g_opt: f64,
    pub kappa_opt: f64,
    pub c_max: f64,
    pub p_up: f64,
    /// Within half a polish step (in log space) of a bound.
    pub boundary_pinned: bool,
    pub evaluations: usize,
    /// Coarse-grid cells followed by every point visited by the refinement.
    pub samples: Vec<MapCell>,
}

/// Coarse log grid over `bounds`, then direct search on (ln g, ln κ) from the
/// best coarse cell.
pub fn numeric_optimize(p_base: &SystemParams, schedule: &Schedule, bounds: &Bounds, opts: &OptimizeOptions) -> Result<OptimumPoint> {
    bounds.validate()?;
    let n = opts.coarse.max(2);
    let gs = Range { lo: bounds.g.0, hi: bounds.g.1, n }.log_values();
    let ks = Range { lo: bounds.kappa.0, hi: bounds.kappa.1, n }.log_values();
    let map = map_over(p_base, schedule, gs, ks, &opts.evaluator);
    let seed = map
        .best()
        .ok_or_else(|| Error::Solver(format!("no valid cell on the coarse grid: {}", first_error(&map.cells))))?;
    let (g0, k0) = (seed.g, seed.kappa);
    let mut out = refine_from(p_base, schedule, bounds, (g0, k0), opts)?;
    out.evaluations += map.cells.len();
    let mut samples = map.cells;
    samples.append(&mut out.samples);
    out.samples = samples;
    Ok(out)
}

fn first_error(cells: &[MapCell]) -> String {
    cells.iter().find_map(|c| c.error.clone()).unwrap_or_default()
}

/// Direct search from a given (g, κ) seed, followed by an axis polish.
pub fn refine_from(
    p_base: &SystemParams,
    schedule: &Schedule,
    bounds: &Bounds,
    seed: (f64, f64),
    opts: &OptimizeOptions,
) -> Result<OptimumPoint> {
    bounds.validate()?;
    if !bounds.contains(seed.0, seed.1) {
        return Err(invalid("seed", "outside the search bounds"));
    }
    let mut samples: Vec<MapCell> = Vec::new();
    let probe = |g: f64, kappa: f64, samples: &mut Vec<MapCell>| -> f64 {
        // ln/exp round trips may step just past a bound
        let (g, kappa) = (bounds.snap_g(g), bounds.snap_kappa(kappa));
        if !bounds.contains(g, kappa) {
            return f64::NEG_INFINITY;
        }
        let cell = MapCell::at(p_base, g, kappa, schedule, &opts.evaluator);
        let c = if cell.valid { cell.c_n } else { f64::NEG_INFINITY };
        samples.push(cell);
        c
    };

    let step = (1.0 + 4.0 * opts.polish_step).ln();
    let nm = minimize(
        |x| -probe(x[0].exp(), x[1].exp(), &mut samples),
        &[seed.0.ln(), seed.1.ln()],
        &[step, step],
        opts.simplex,
    );
    let (mut g, mut kappa) = (bounds.snap_g(nm.x[0].exp()), bounds.snap_kappa(nm.x[1].exp()));
    let mut best = probe(g, kappa, &mut samples);
    if !best.is_finite() {
        return Err(Error::Solver(format!("refinement ended on an invalid point: {}", first_error(&samples))));
    }

    // Axis polish: move to the best of the four ±step neighbours until none improves.
    let s = opts.polish_step;
    for _ in 0..200 {
        let cand = [(g * (1.0 + s), kappa), (g * (1.0 - s), kappa), (g, kappa * (1.0 + s)), (g, kappa * (1.0 - s))];
        let mut moved = false;
        for (cg, ck) in cand {
            let v = probe(cg, ck, &mut samples);
            if v > best {
                best = v;
                g = cg;
                kappa = ck;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let p_up = samples
        .iter()
        .rev()
        .find(|c| c.valid && c.g == g && c.kappa == kappa)
        .map(|c| c.p_up)
        .unwrap_or(f64::NAN);
    let near = |x: f64, (lo, hi): (f64, f64)| (x / lo).ln() < 0.5 * s || (hi / x).ln() < 0.5 * s;
    Ok(OptimumPoint {
        g_opt: g,
        kappa_opt: kappa,
        c_max: best,
        p_up,
        boundary_pinned: near(g, bounds.g) || near(kappa, bounds.kappa),
        evaluations: samples.len(),
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sweep {
    /// Counting windows t_m; t_ph follows the schedule's t_m/t_ph ratio.
    PulseDuration(Vec<f64>),
    /// Detunings Δ = ω_q − ω_r at fixed λ/Λ = `ratio`: ω_q = Δ(r+1)/2,
    /// ω_r = Δ(r−1)/2. The g bounds scale with Δ relative to the base system.
    Detuning { values: Vec<f64>, ratio: f64 },
}

impl Sweep {
    pub fn values(&self) -> &[f64] {
        match self {
            Sweep::PulseDuration(v) => v,
            Sweep::Detuning { values, .. } => values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub value: f64,
    pub omega_q: f64,
    pub omega_r: f64,
    pub t_m: f64,
    pub optimum: OptimumPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
    /// C_max strictly increases along the sweep.
    pub increasing: bool,
    /// Indices i where C_max[i + 1] ≤ C_max[i].
    pub violations: Vec<usize>,
}

/// Runs [`numeric_optimize`] at every sweep value (in parallel) and reports
/// whether C_max grows monotonically.
pub fn cmax_curve(sweep: &Sweep, p_base: &SystemParams, schedule: &Schedule, bounds: &Bounds, opts: &OptimizeOptions) -> Result<Curve> {
    let values = sweep.values();
    if values.is_empty() {
        return Err(invalid("sweep", "no sweep values"));
    }
    if let Sweep::Detuning { ratio, .. } = sweep {
        if !(*ratio > 1.0) {
            return Err(invalid("ratio", "λ/Λ must exceed 1"));
        }
    }
    let base_detuning = p_base.omega_q - p_base.omega_r;
    let points: Vec<Result<CurvePoint>> = values
        .par_iter()
        .map(|&v| {
            let (p, sch, b) = match sweep {
                Sweep::PulseDuration(_) => (*p_base, Schedule::new(v, schedule.tm_over_tph)?, *bounds),
                Sweep::Detuning { ratio, .. } => {
                    if !(v > 0.0) {
                        return Err(invalid("detuning", format!("must be > 0, got {v}")));
                    }
                    let p = SystemParams { omega_q: 0.5 * v * (ratio + 1.0), omega_r: 0.5 * v * (ratio - 1.0), ..*p_base };
                    (p, *schedule, bounds.scale_g(v / base_detuning))
                }
            };
            let optimum = numeric_optimize(&p, &sch, &b, opts)?;
            Ok(CurvePoint { value: v, omega_q: p.omega_q, omega_r: p.omega_r, t_m: sch.t_m, optimum })
        })
        .collect();
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    let violations: Vec<usize> = points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].optimum.c_max <= w[0].optimum.c_max)
        .map(|(i, _)| i)
        .collect();
    Ok(Curve { increasing: violations.is_empty(), violations, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz, mhz, us};

    fn base() -> SystemParams {
        SystemParams::new(ghz(5.0), ghz(4.09), mhz(86.4), mhz(5.8), 1.0).unwrap()
    }

    #[test]
    fn linear_range_hits_endpoints() {
        let v = Range::new(1.0, 2.0, 5).unwrap().values();
        assert_eq!(v, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(Range::new(2.0, 1.0, 5).is_err());
    }

    #[test]
    fn zero_efficiency_map_is_zero() {
        let sch = Schedule::new(us(1.0), 6.0).unwrap();
        let m = contrast_map(
            &base().with_eta(0.0),
            &sch,
            Range::new(mhz(20.0), mhz(200.0), 8).unwrap(),
            Range::new(mhz(1.0), mhz(20.0), 8).unwrap(),
            &Evaluator::Dispersive,
        )
        .unwrap();
        assert!(m.cells.iter().all(|c| c.valid && c.c_n == 0.0));
    }

    #[test]
    fn small_map_rejected() {
        let sch = Schedule::new(us(1.0), 6.0).unwrap();
        let r = Range::new(mhz(20.0), mhz(200.0), 4).unwrap();
        assert!(contrast_map(&base(), &sch, r, r, &Evaluator::Dispersive).is_err());
    }

    #[test]
    fn dispersive_model_pins_coupling_to_upper_bound() {
        // without Purcell decay a larger pull always helps
        let sch = Schedule::new(us(1.0), 6.0).unwrap();
        let b = Bounds::new((mhz(10.0), mhz(100.0)), (mhz(0.5), mhz(30.0))).unwrap();
        let opts = OptimizeOptions { evaluator: Evaluator::Dispersive, ..Default::default() };
        let o = numeric_optimize(&base(), &sch, &b, &opts).unwrap();
        assert!(o.boundary_pinned);
        assert!(o.g_opt > mhz(99.0));
        for k in [1.02, 0.98] {
            let (c, _) = evaluate(&base().with_g(o.g_opt).with_kappa(o.kappa_opt * k), &sch, &Evaluator::Dispersive).unwrap();
            assert!(c <= o.c_max);
        }
    }
}
