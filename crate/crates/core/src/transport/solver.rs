//! Exact exponential-sum solution of the single- and two-excitation hierarchies.
//!
//! Ground branch: the pulse drives (a, σ₋) through the coupled 2×2 block;
//! output amplitudes follow by Parseval, so ∑_k|⟨b_k|Ψ⟩|² = (κ/2)∫|a + Λσ₋|².
//!
//! Excited branch: the Φ sector (qubit excited, photon still in flight)
//! decays freely; absorption of the probe feeds the (a², σ₋a) block; a photon
//! emitted at time u leaves the cavity–qubit pair in w(t; u), a two-time
//! exponential sum. Pair statistics come from triangle integrals of |ℓ_w|².

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{PulseParams, QubitState, SystemParams};

use super::expsum::{
    dd2, dd3, eval_modes, fixed_abs2, int_abs2, int_exp, project, solve_linear,
    triangle_abs2, Mode, Term, TwoTime, TwoTimeScalar,
};
use super::model::{ClickAccounting, Hierarchy, SolverOptions};

const C0: C64 = C64::new(0.0, 0.0);
/// Slack for round-off when checking that probabilities lie in [0, 1].
const PROB_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub t: f64,
    /// Probability that the qubit is excited.
    pub qubit_population: f64,
    /// Click probability if counting stopped at `t`.
    pub click: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub t_m: f64,
    /// Number of exponential terms in the amplitude representation.
    pub terms: usize,
    pub accounting: ClickAccounting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub state: QubitState,
    pub click: f64,
    /// η-linear part of the click probability.
    pub first_order: f64,
    /// η² pair correction subtracted from `first_order`.
    pub two_photon: f64,
    /// Qubit excitation probability at t_m.
    pub qubit_population: f64,
    /// Conserved excitation norm at t_m divided by its initial value.
    pub norm: f64,
    pub curve: Vec<TimePoint>,
    pub meta: RunMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastResult {
    pub c_n: f64,
    pub click_up: f64,
    pub click_down: f64,
    /// Probability that the qubit is still excited at t_m, starting from |↑⟩.
    pub p_up: f64,
    pub up: RunResult,
    pub down: RunResult,
}

fn sample_times(t_m: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| t_m * i as f64 / (n - 1) as f64).collect()
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && (-PROB_SLACK..=1.0 + PROB_SLACK).contains(&v) {
        Ok(())
    } else {
        Err(Error::Solver(format!("{name} = {v} outside [0, 1]")))
    }
}

/// Qubit starts in |↓⟩: a single excitation, brought in by the probe.
pub(crate) struct GroundSector {
    /// (a, σ₋) = −f·d(t).
    pub d: Vec<Mode>,
    /// Output source ℓ = a + Λσ₋.
    pub ell: Vec<Term>,
}

impl GroundSector {
    pub fn new(h: &Hierarchy) -> Self {
        let drive = Mode { c: [C64::from(h.xi0), C64::from(h.xi0 * h.lam_bs)], r: C64::from(-h.gamma) };
        let d = solve_linear(&h.e1, [C0, C0], &[drive], h.t_m);
        let ell = project(&d, C64::from(-h.f), C64::from(-h.f * h.lam_bs));
        Self { d, ell }
    }

    pub fn click(&self, h: &Hierarchy, t: f64) -> f64 {
        h.eta * 0.5 * h.kappa * int_abs2(&self.ell, t)
    }

    pub fn qubit_population(&self, h: &Hierarchy, t: f64) -> f64 {
        (h.f * eval_modes(&self.d, t)[1]).norm_sqr()
    }

    /// Input guide + output guide + cavity/qubit probability.
    pub fn norm(&self, h: &Hierarchy, t: f64) -> f64 {
        let d = eval_modes(&self.d, t);
        let inside = h.f * h.f * (d[0].norm_sqr() + d[1].norm_sqr());
        let emitted = h.kappa * int_abs2(&self.ell, t);
        let overlap: C64 = self.ell.iter().map(|x| x.c * h.xi0 * int_exp(x.r - h.gamma, t)).sum();
        1.0 + inside + emitted + 2.0 * h.f * overlap.re
    }
}

/// Qubit starts in the dressed |↑⟩ state: two excitations with the probe.
pub(crate) struct ExcitedSector {
    /// Φ sector (a, σ₋), initial (λ, 1).
    pub phi: Vec<Mode>,
    pub lphi: Vec<Term>,
    /// (a², σ₋a) block.
    pub g: Vec<Mode>,
    /// Cavity/qubit amplitudes after one emission, w(t; u).
    pub w: Vec<TwoTime>,
    /// ℓ_w = w_a + Λw_σ.
    pub lw: Vec<TwoTimeScalar>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ExcitedObservables {
    pub p_up: f64,
    /// ∫∫|⟨b_k b_k'⟩|² over output-guide pairs.
    pub n2: f64,
    /// Output photon with the second excitation still in cavity/qubit.
    pub n1: f64,
    /// Mean output photon number including pairs with one photon in the input guide.
    pub n_out: f64,
    pub norm: f64,
}

impl ExcitedSector {
    pub fn new(h: &Hierarchy, ground: &GroundSector) -> Self {
        let lb = C64::from(h.lam_bs);
        let phi = solve_linear(&h.e1, [C64::from(h.lam), C64::from(1.0)], &[], h.t_m);
        let lphi = project(&phi, C64::from(1.0), lb);
        let amp = -h.f * h.xi0;
        let forcing: Vec<Mode> = phi
            .iter()
            .map(|m| Mode { c: [amp * 2.0 * m.c[0], amp * (m.c[1] + lb * m.c[0])], r: m.r - h.gamma })
            .collect();
        let g = solve_linear(&h.e2, [C0, C0], &forcing, h.t_m);

        // R(u) = J(u) + f·ℓ_Φ(u)·d(u): the cavity/qubit state right after an emission at u.
        let mut r: Vec<Mode> = g.iter().map(|m| Mode { c: [m.c[0] + lb * m.c[1], m.c[1]], r: m.r }).collect();
        for a in &lphi {
            for c in &ground.d {
                r.push(Mode { c: [h.f * a.c * c.c[0], h.f * a.c * c.c[1]], r: a.r + c.r });
            }
        }
        let rates = h.e1.rates();
        let mut w = Vec::with_capacity(2 * r.len() + lphi.len() * ground.d.len());
        for mu in 0..2 {
            for m in &r {
                w.push(TwoTime { c: h.e1.proj[mu].apply(m.c), p: rates[mu], q: m.r });
            }
        }
        for a in &lphi {
            for c in &ground.d {
                let k = -h.f * a.c;
                w.push(TwoTime { c: [k * c.c[0], k * c.c[1]], p: c.r, q: a.r + c.r });
            }
        }
        let lw = w
            .iter()
            .map(|x| TwoTimeScalar { c: x.c[0] + lb * x.c[1], p: x.p, q: x.q })
            .collect();
        Self { phi, lphi, g, w, lw }
    }

    pub fn terms(&self) -> usize {
        self.w.len()
    }

    pub fn observables(&self, h: &Hierarchy, t: f64) -> ExcitedObservables {
        let k = h.kappa;
        let f = h.f;
        let xi0 = h.xi0;
        let gam = h.gamma;
        let w0: Vec<TwoTimeScalar> = self.w.iter().map(|x| x.component(0)).collect();
        let w1: Vec<TwoTimeScalar> = self.w.iter().map(|x| x.component(1)).collect();
        let w1sq = fixed_abs2(&w1, t);
        let n1 = 0.5 * k * (fixed_abs2(&w0, t) + w1sq);
        let tri = triangle_abs2(&self.lw, t);
        let n2 = 0.5 * k * k * tri;

        let g_t = eval_modes(&self.g, t);
        let phi_t = eval_modes(&self.phi, t);
        // ∫₀^t w(t; u)Ξ(u) du
        let mut w_xi = [C0, C0];
        for x in &self.w {
            let s = xi0 * t * dd2(x.p * t, (x.q - gam) * t);
            w_xi[0] += x.c[0] * s;
            w_xi[1] += x.c[1] * s;
        }
        let p_up = g_t[1].norm_sqr() + k * w1sq + phi_t[1].norm_sqr()
            + 2.0 * f * (phi_t[1].conj() * w_xi[1]).re;

        // Pairs with one photon from the Φ sector and one from the probe path.
        let lphi_sq = int_abs2(&self.lphi, t);
        let mut ab = C0;
        for a in &self.lphi {
            let ra = a.r.conj();
            for x in &self.lw {
                let pre = a.c.conj() * x.c * xi0 * t * t;
                let z = (x.q - gam + ra) * t;
                ab += pre * (dd3(C0, (x.p + ra) * t, z) + dd3(C0, (x.p - gam) * t, z));
            }
        }
        let cross = f * k * ab.re;
        let n_out = 2.0 * n2 + n1 + 0.5 * k * lphi_sq + cross;

        let n12 = n2 + 0.5 * k * lphi_sq + cross;
        let lphi_xi: C64 = self.lphi.iter().map(|a| a.c * xi0 * int_exp(a.r - gam, t)).sum();
        let n11 = n2 + k * lphi_sq + 2.0 * (f * lphi_xi).norm_sqr() + 2.0 * cross;
        let n1_in = n1
            + phi_t[0].norm_sqr()
            + phi_t[1].norm_sqr()
            + 2.0 * f * (phi_t[0].conj() * w_xi[0] + phi_t[1].conj() * w_xi[1]).re;
        let total = 0.5 * n11 + 0.5 * n2 + n12 + n1 + n1_in + 0.5 * g_t[0].norm_sqr() + g_t[1].norm_sqr();
        let norm = total / (1.0 + h.lam * h.lam);

        ExcitedObservables { p_up, n2, n1, n_out, norm }
    }

    /// (first-order, pair) parts of the click probability.
    pub fn click_parts(obs: &ExcitedObservables, eta: f64, acc: ClickAccounting) -> (f64, f64) {
        match acc {
            ClickAccounting::OutputOnly => (eta * (2.0 * obs.n2 + obs.n1), eta * eta * obs.n2),
            ClickAccounting::Complete => (eta * obs.n_out, 0.5 * eta * eta * obs.n2),
        }
    }
}

pub(crate) fn prepare(
    p: &SystemParams,
    pulse: &PulseParams,
    t_m: f64,
    opts: &SolverOptions,
) -> Result<(Hierarchy, GroundSector)> {
    let h = Hierarchy::new(p, pulse, t_m, opts)?;
    let ground = GroundSector::new(&h);
    Ok((h, ground))
}

fn ground_run(h: &Hierarchy, ground: &GroundSector, opts: &SolverOptions) -> Result<RunResult> {
    let curve: Vec<TimePoint> = sample_times(h.t_m, opts.curve_points)
        .into_iter()
        .map(|t| TimePoint { t, qubit_population: ground.qubit_population(h, t), click: ground.click(h, t) })
        .collect();
    let click = ground.click(h, h.t_m);
    check_prob("P_click|down", click)?;
    Ok(RunResult {
        state: QubitState::Down,
        click,
        first_order: click,
        two_photon: 0.0,
        qubit_population: ground.qubit_population(h, h.t_m),
        norm: ground.norm(h, h.t_m),
        curve,
        meta: RunMeta { t_m: h.t_m, terms: ground.d.len(), accounting: opts.accounting },
    })
}

fn excited_run(h: &Hierarchy, ex: &ExcitedSector, opts: &SolverOptions) -> Result<RunResult> {
    let click_at = |obs: &ExcitedObservables| {
        let (a, b) = ExcitedSector::click_parts(obs, h.eta, opts.accounting);
        a - b
    };
    let curve: Vec<TimePoint> = sample_times(h.t_m, opts.curve_points)
        .into_iter()
        .map(|t| {
            let o = ex.observables(h, t);
            TimePoint { t, qubit_population: o.p_up, click: click_at(&o) }
        })
        .collect();
    let obs = ex.observables(h, h.t_m);
    let (first, pair) = ExcitedSector::click_parts(&obs, h.eta, opts.accounting);
    if pair > first + PROB_SLACK {
        return Err(Error::Solver(format!(
            "two-photon correction {pair:.6} exceeds the first-order term {first:.6}"
        )));
    }
    let click = first - pair;
    check_prob("P_click|up", click)?;
    check_prob("P_up", obs.p_up)?;
    Ok(RunResult {
        state: QubitState::Up,
        click,
        first_order: first,
        two_photon: pair,
        qubit_population: obs.p_up,
        norm: obs.norm,
        curve,
        meta: RunMeta { t_m: h.t_m, terms: ex.terms(), accounting: opts.accounting },
    })
}

/// Click probability and qubit population for the qubit prepared in |↓⟩.
pub fn solve_ground(p: &SystemParams, pulse: &PulseParams, t_m: f64, opts: &SolverOptions) -> Result<RunResult> {
    let (h, ground) = prepare(p, pulse, t_m, opts)?;
    ground_run(&h, &ground, opts)
}

/// Click probability and P↑(t) for the qubit prepared in the dressed |↑⟩ state.
pub fn solve_excited(p: &SystemParams, pulse: &PulseParams, t_m: f64, opts: &SolverOptions) -> Result<RunResult> {
    let (h, ground) = prepare(p, pulse, t_m, opts)?;
    let ex = ExcitedSector::new(&h, &ground);
    excited_run(&h, &ex, opts)
}

/// Runs both branches on the same hierarchy and forms C_n = P↑_click − P↓_click.
pub fn full_contrast(p: &SystemParams, pulse: &PulseParams, t_m: f64, opts: &SolverOptions) -> Result<ContrastResult> {
    let (h, ground) = prepare(p, pulse, t_m, opts)?;
    let ex = ExcitedSector::new(&h, &ground);
    let down = ground_run(&h, &ground, opts)?;
    let up = excited_run(&h, &ex, opts)?;
    Ok(ContrastResult {
        c_n: up.click - down.click,
        click_up: up.click,
        click_down: down.click,
        p_up: up.qubit_population,
        up,
        down,
    })
}

/// C_n and P↑ only, skipping the time series.
pub fn contrast_point(p: &SystemParams, pulse: &PulseParams, t_m: f64, opts: &SolverOptions) -> Result<(f64, f64)> {
    let (h, ground) = prepare(p, pulse, t_m, opts)?;
    let ex = ExcitedSector::new(&h, &ground);
    let obs = ex.observables(&h, t_m);
    let (first, pair) = ExcitedSector::click_parts(&obs, h.eta, opts.accounting);
    let c = first - pair - ground.click(&h, t_m);
    if !c.is_finite() {
        return Err(Error::Solver("non-finite contrast".into()));
    }
    Ok((c, obs.p_up))
}
