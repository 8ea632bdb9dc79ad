//! Wave-vector grids and per-mode amplitude views.
//!
//! The solver itself never discretizes k: output-guide integrals are done
//! exactly. These views evaluate the same closed-form amplitudes mode by mode
//! on a grid, which is what a direct discretization of the waveguide
//! continuum would hold, and let [`super::convergence`] compare grid
//! quadrature against the exact totals.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::params::{PulseParams, SystemParams};

use super::expsum::{dd2, dd3, eval_modes, TwoTimeScalar};
use super::model::{ClickAccounting, Hierarchy, SolverOptions};
use super::solver::{prepare, ExcitedSector, GroundSector};

const C0: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Rotating-frame detunings k = ω − ω_ph with positive quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

/// A spectral feature to resolve: tan-mapped nodes concentrate within ~`width` of `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: f64,
    pub width: f64,
}

impl KGrid {
    /// Uniform nodes with trapezoid weights.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n < 2 {
            return Err(invalid("grid", format!("need hi > lo and n >= 2 (lo={lo}, hi={hi}, n={n})")));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
        let mut weights = vec![h; n];
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        Ok(Self { nodes, weights, lo, hi })
    }

    /// Union of tan-mapped node sets, one per cluster, each spanning [lo, hi].
    /// Weights are the lengths of the cells between neighbouring midpoints.
    pub fn clustered(lo: f64, hi: f64, clusters: &[Cluster], per_cluster: usize) -> Result<Self> {
        if !(hi > lo) || per_cluster < 2 || clusters.is_empty() {
            return Err(invalid("grid", "need hi > lo, at least one cluster and 2 nodes per cluster"));
        }
        let mut nodes = Vec::with_capacity(clusters.len() * per_cluster);
        for c in clusters {
            if !(c.width > 0.0) {
                return Err(invalid("grid", format!("cluster width must be > 0, got {}", c.width)));
            }
            let a = ((lo - c.center) / c.width).atan();
            let b = ((hi - c.center) / c.width).atan();
            for i in 0..per_cluster {
                let th = a + (b - a) * (i as f64 + 0.5) / per_cluster as f64;
                nodes.push(c.center + c.width * th.tan());
            }
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (hi - lo));
        let n = nodes.len();
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let left = if i == 0 { lo } else { 0.5 * (nodes[i - 1] + nodes[i]) };
            let right = if i + 1 == n { hi } else { 0.5 * (nodes[i] + nodes[i + 1]) };
            weights.push(right - left);
        }
        Ok(Self { nodes, weights, lo, hi })
    }

    /// Default grid for a run: clusters on the carrier, the cavity-like and
    /// the qubit-like resonances, spanning `span_factor` widths beyond them.
    pub fn for_run(
        p: &SystemParams,
        pulse: &PulseParams,
        t_m: f64,
        opts: &SolverOptions,
        per_cluster: usize,
        span_factor: f64,
    ) -> Result<Self> {
        let h = Hierarchy::new(p, pulse, t_m, opts)?;
        let clusters = features(&h);
        let reach = span_factor * clusters.iter().map(|c| c.width).fold(0.0, f64::max);
        let lo = clusters.iter().map(|c| c.center).fold(f64::INFINITY, f64::min) - reach;
        let hi = clusters.iter().map(|c| c.center).fold(f64::NEG_INFINITY, f64::max) + reach;
        Self::clustered(lo, hi, &clusters, per_cluster)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }

    /// Rejects grids that miss the pulse band or a resonance.
    pub fn check_coverage(&self, p: &SystemParams, pulse: &PulseParams, t_m: f64, opts: &SolverOptions) -> Result<()> {
        let h = Hierarchy::new(p, pulse, t_m, opts)?;
        for c in features(&h) {
            let need = 10.0 * c.width;
            if c.center - need < self.lo || c.center + need > self.hi {
                return Err(Error::Coverage(format!(
                    "[{:.4e}, {:.4e}] rad/s does not contain the feature at {:.4e} ± {:.4e}",
                    self.lo, self.hi, c.center, need
                )));
            }
        }
        Ok(())
    }
}

fn features(h: &Hierarchy) -> Vec<Cluster> {
    let floor = 1.0 / h.t_m;
    let mut out = vec![Cluster { center: 0.0, width: h.gamma.max(floor) }];
    for e in h.e1.values {
        out.push(Cluster { center: e.re, width: (-e.im).max(floor) });
    }
    out
}

/// Rotating-frame spectral amplitude of the probe, phased so that its
/// transform is the real envelope used by the solver.
fn xi_k(h: &Hierarchy, k: f64) -> C64 {
    h.xi0 / TAU * I / C64::new(k, h.gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleExcitationState {
    pub t: f64,
    pub a: C64,
    pub sigma: C64,
    /// ⟨0|b^I_k|Ψ⟩ on the grid nodes.
    pub b_in: Vec<C64>,
    /// ⟨0|b^II_k|Ψ⟩ on the grid nodes.
    pub b_out: Vec<C64>,
}

impl SingleExcitationState {
    pub fn norm(&self, grid: &KGrid) -> f64 {
        let guides: f64 = grid
            .weights
            .iter()
            .zip(self.b_in.iter().zip(&self.b_out))
            .map(|(w, (x, y))| w * (x.norm_sqr() + y.norm_sqr()))
            .sum();
        guides + self.a.norm_sqr() + self.sigma.norm_sqr()
    }

    pub fn output_photons(&self, grid: &KGrid) -> f64 {
        grid.weights.iter().zip(&self.b_out).map(|(w, y)| w * y.norm_sqr()).sum()
    }
}

fn scattered(h: &Hierarchy, ground: &GroundSector, k: f64, t: f64) -> C64 {
    let mk = C64::new(0.0, -k * t);
    ground.ell.iter().map(|x| h.f * x.c * t * dd2(mk, x.r * t)).sum()
}

/// Ground-branch amplitudes at time `t` on `grid`.
pub fn single_excitation_state(
    p: &SystemParams,
    pulse: &PulseParams,
    t_m: f64,
    opts: &SolverOptions,
    grid: &KGrid,
    t: f64,
) -> Result<SingleExcitationState> {
    let (h, ground) = prepare(p, pulse, t_m, opts)?;
    let d = eval_modes(&ground.d, t);
    let b_out: Vec<C64> = grid.nodes.par_iter().map(|&k| scattered(&h, &ground, k, t)).collect();
    let b_in = grid
        .nodes
        .iter()
        .zip(&b_out)
        .map(|(&k, &s)| xi_k(&h, k) * C64::from_polar(1.0, -k * t) + s)
        .collect();
    Ok(SingleExcitationState { t, a: -h.f * d[0], sigma: -h.f * d[1], b_in, b_out })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoExcitationState {
    pub t: f64,
    /// ⟨0|a²|Ψ↑⟩ and ⟨0|σ₋a|Ψ↑⟩.
    pub a2: C64,
    pub sigma_a: C64,
    /// ⟨0|a|Φ⟩ and ⟨0|σ₋|Φ⟩.
    pub phi_a: C64,
    pub phi_sigma: C64,
    /// ⟨0|b^II_k|Φ⟩ (equal for both guides).
    pub phi_k: Vec<C64>,
    /// ⟨0|b^α_k a|Ψ↑⟩ and ⟨0|b^α_k σ₋|Ψ↑⟩ for α = I (input) and II (output).
    pub x_in: Vec<C64>,
    pub y_in: Vec<C64>,
    pub x_out: Vec<C64>,
    pub y_out: Vec<C64>,
    /// Free probe amplitude ξ_k e^{−ikt} in the input guide.
    pub probe: Vec<C64>,
    /// Φ^{II,II}_{k,k'} = ⟨0|b^II_k b^II_k'|Ψ↑⟩/√2, row-major n×n.
    pub pair_out: Vec<C64>,
}

impl TwoExcitationState {
    pub fn n(&self) -> usize {
        self.x_out.len()
    }

    pub fn pair(&self, i: usize, j: usize) -> C64 {
        self.pair_out[i * self.n() + j]
    }

    /// Largest |Φ_{kk'} − Φ_{k'k}|.
    pub fn pair_asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.pair(i, j) - self.pair(j, i)).norm());
            }
        }
        worst
    }

    /// Grid-quadrature versions of (P↑, N₂, N₁) in the solver's notation.
    pub fn observables(&self, grid: &KGrid) -> (f64, f64, f64) {
        let (p_up, n1) = self.single_sums(grid);
        let (n2, _) = self.stored_pair_sums(grid);
        (p_up, n2, n1)
    }

    /// Mean number of output photons, counting pairs with one photon in the input guide.
    pub fn output_photons(&self, grid: &KGrid) -> f64 {
        let (_, n1) = self.single_sums(grid);
        let (n2, n12) = self.stored_pair_sums(grid);
        n2 + n1 + n12
    }

    fn single_sums(&self, grid: &KGrid) -> (f64, f64) {
        let w = &grid.weights;
        let mut p_up = self.sigma_a.norm_sqr();
        let mut n1 = 0.0;
        for i in 0..self.n() {
            p_up += w[i] * (self.y_in[i].norm_sqr() + self.y_out[i].norm_sqr());
            n1 += w[i] * (self.x_out[i].norm_sqr() + self.y_out[i].norm_sqr());
        }
        (p_up, n1)
    }

    fn stored_pair_sums(&self, grid: &KGrid) -> (f64, f64) {
        let n = self.n();
        assert_eq!(self.pair_out.len(), n * n, "pair field not stored");
        self.pair_sums(grid, |i, row| row.copy_from_slice(&self.pair_out[i * n..(i + 1) * n]))
    }

    /// (N₂, N₁₂): 2Σ|Φ|² over output pairs, and Σ|⟨b^I b^II⟩|² with
    /// ⟨b^I_k b^II_k'⟩ = √2Φ_{kk'} + (free probe)_k·φ_k'.
    fn pair_sums<R: Fn(usize, &mut [C64]) + Sync>(&self, grid: &KGrid, row: R) -> (f64, f64) {
        let n = self.n();
        let w = &grid.weights;
        let sqrt2 = std::f64::consts::SQRT_2;
        (0..n)
            .into_par_iter()
            .map_init(
                || vec![C0; n],
                |buf, i| {
                    row(i, buf);
                    let free = self.probe[i];
                    let mut n2 = 0.0;
                    let mut n12 = 0.0;
                    for j in 0..n {
                        let ww = w[i] * w[j];
                        n2 += ww * buf[j].norm_sqr();
                        n12 += ww * (sqrt2 * buf[j] + free * self.phi_k[j]).norm_sqr();
                    }
                    (2.0 * n2, n12)
                },
            )
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    }
}

/// Row evaluator for the output pair field Φ_{k1,k2}.
///
/// Each term needs dd3(0, (ik + p)t, (i(k1 + k2) + q)t). Writing it as the
/// difference quotient of dd2 values and factoring e^{i(k1+k2)t} = u₁u₂
/// leaves no exponentials in the inner loop; near-coincident arguments fall
/// back to the series.
struct PairField<'a> {
    terms: &'a [TwoTimeScalar],
    t: f64,
    scale: f64,
    nodes: &'a [f64],
    /// e^{ik_j t}
    u: Vec<C64>,
    /// e^{q t} per term
    eq: Vec<C64>,
    /// dd2(0, (ik_j + p)t), row-major terms × nodes
    da: Vec<C64>,
}

impl<'a> PairField<'a> {
    fn new(h: &Hierarchy, ex: &'a ExcitedSector, grid: &'a KGrid, t: f64) -> Self {
        let nodes = &grid.nodes[..];
        let terms = &ex.lw[..];
        let da = terms
            .iter()
            .flat_map(|x| nodes.iter().map(move |&k| dd2(C0, (C64::new(0.0, k) + x.p) * t)))
            .collect();
        Self {
            terms,
            t,
            scale: h.f * h.f * t * t / std::f64::consts::SQRT_2,
            nodes,
            u: nodes.iter().map(|&k| C64::from_polar(1.0, k * t)).collect(),
            eq: terms.iter().map(|x| (x.q * t).exp()).collect(),
            da,
        }
    }

    fn row(&self, i: usize, out: &mut [C64]) {
        const NEAR: f64 = 0.5;
        let n = self.nodes.len();
        let t = self.t;
        let k1 = self.nodes[i];
        for (j, slot) in out.iter_mut().enumerate() {
            let k2 = self.nodes[j];
            let u12 = self.u[i] * self.u[j];
            let mut acc = C0;
            for (m, x) in self.terms.iter().enumerate() {
                let z = (C64::new(0.0, k1 + k2) + x.q) * t;
                let dz = if z.norm() > NEAR { (self.eq[m] * u12 - 1.0) / z } else { dd2(C0, z) };
                let (a1, a2) = (self.da[m * n + j], self.da[m * n + i]);
                // z − (ik2 + p)t = (ik1 + q − p)t and symmetrically
                let d1 = (C64::new(0.0, k1) + x.q - x.p) * t;
                let d2 = (C64::new(0.0, k2) + x.q - x.p) * t;
                let t1 = if d1.norm() > NEAR { (dz - a1) / d1 } else { dd3(C0, (C64::new(0.0, k2) + x.p) * t, z) };
                let t2 = if d2.norm() > NEAR { (dz - a2) / d2 } else { dd3(C0, (C64::new(0.0, k1) + x.p) * t, z) };
                acc += x.c * (t1 + t2);
            }
            *slot = self.scale * u12.conj() * acc;
        }
    }
}

/// Excited-branch amplitudes at time `t` on `grid`, including the n×n pair field.
pub fn two_excitation_state(
    p: &SystemParams,
    pulse: &PulseParams,
    t_m: f64,
    opts: &SolverOptions,
    grid: &KGrid,
    t: f64,
) -> Result<TwoExcitationState> {
    let (h, ground) = prepare(p, pulse, t_m, opts)?;
    let ex = ExcitedSector::new(&h, &ground);
    let mut state = per_mode_state(&h, &ex, grid, t);
    let pairs = PairField::new(&h, &ex, grid, t);
    let n = grid.len();
    state.pair_out = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut row = vec![C0; n];
            pairs.row(i, &mut row);
            row
        })
        .collect();
    Ok(state)
}

/// Everything except the pair field, which is left empty.
fn per_mode_state(h: &Hierarchy, ex: &ExcitedSector, grid: &KGrid, t: f64) -> TwoExcitationState {
    let g = eval_modes(&ex.g, t);
    let phi = eval_modes(&ex.phi, t);
    let f = h.f;

    let per_k: Vec<(C64, C64, C64, C64)> = grid
        .nodes
        .par_iter()
        .map(|&k| {
            let ik = C64::new(0.0, k);
            let mut x = C0;
            let mut y = C0;
            for term in &ex.w {
                let s = f * t * dd2((term.p - ik) * t, term.q * t);
                x += term.c[0] * s;
                y += term.c[1] * s;
            }
            let phik: C64 = ex.lphi.iter().map(|a| f * a.c * t * dd2(-ik * t, a.r * t)).sum();
            let free = xi_k(h, k) * C64::from_polar(1.0, -k * t);
            (x, y, phik, free)
        })
        .collect();

    TwoExcitationState {
        t,
        a2: g[0],
        sigma_a: g[1],
        phi_a: phi[0],
        phi_sigma: phi[1],
        phi_k: per_k.iter().map(|v| v.2).collect(),
        x_in: per_k.iter().map(|v| v.0 + v.3 * phi[0]).collect(),
        y_in: per_k.iter().map(|v| v.1 + v.3 * phi[1]).collect(),
        x_out: per_k.iter().map(|v| v.0).collect(),
        y_out: per_k.iter().map(|v| v.1).collect(),
        probe: per_k.iter().map(|v| v.3).collect(),
        pair_out: Vec::new(),
    }
}

/// Grid estimates of (C_n, P↑) at t_m using the same click accounting as the solver.
pub fn grid_contrast(
    p: &SystemParams,
    pulse: &PulseParams,
    t_m: f64,
    opts: &SolverOptions,
    grid: &KGrid,
) -> Result<(f64, f64)> {
    let eta = p.eta;
    let down = single_excitation_state(p, pulse, t_m, opts, grid, t_m)?;
    let (h, ground) = prepare(p, pulse, t_m, opts)?;
    let ex = ExcitedSector::new(&h, &ground);
    // the pair field is summed row by row and never stored
    let up = per_mode_state(&h, &ex, grid, t_m);
    let pairs = PairField::new(&h, &ex, grid, t_m);
    let (p_up, n1) = up.single_sums(grid);
    let (n2, n12) = up.pair_sums(grid, |i, row| pairs.row(i, row));
    let click_up = match opts.accounting {
        ClickAccounting::OutputOnly => eta * (2.0 * n2 + n1) - eta * eta * n2,
        ClickAccounting::Complete => eta * (n2 + n1 + n12) - 0.5 * eta * eta * n2,
    };
    Ok((click_up - eta * down.output_photons(grid), p_up))
}
