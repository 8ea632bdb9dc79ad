//! Exponential sums, divided differences of exp, and the linear 2×2 propagator.
//!
//! Every amplitude of the hierarchy is a finite sum of terms c·e^{rt} (one
//! time) or c·e^{p(t−u)}e^{qu} (emission time u, observation time t). Time
//! integrals of products of such terms reduce to divided differences of exp:
//!
//!   ∫₀^T e^{at}dt = T·e[0, aT]
//!   ∫₀^T e^{a(T−u)+bu}du = T·e[aT, bT]
//!   ∫₀^T∫₀^t e^{a(t−u)+bu}du dt = T²·e[0, aT, bT]

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const C0: C64 = C64::new(0.0, 0.0);
const C1: C64 = C64::new(1.0, 0.0);

/// First divided difference e[a, b] = (e^b − e^a)/(b − a).
pub fn dd2(a: C64, b: C64) -> C64 {
    let d = b - a;
    if d.norm() < 0.5 {
        // e^{m}·sinh(h)/h with m the midpoint and h = d/2.
        let h2 = 0.25 * d * d;
        let mut term = C1;
        let mut sum = C1;
        for n in 1..14 {
            term = term * h2 / ((2 * n * (2 * n + 1)) as f64);
            sum += term;
        }
        (0.5 * (a + b)).exp() * sum
    } else {
        (b.exp() - a.exp()) / d
    }
}

/// Second divided difference e[a, b, c].
pub fn dd3(a: C64, b: C64, c: C64) -> C64 {
    let pts = [a, b, c];
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let (i, j, k) = pairs
        .into_iter()
        .max_by(|x, y| {
            (pts[x.0] - pts[x.1]).norm().total_cmp(&(pts[y.0] - pts[y.1]).norm())
        })
        .expect("three pairs");
    let spread = (pts[i] - pts[j]).norm();
    if spread < 0.5 {
        // Taylor series about the centroid: Σ h_n(δ)/(n+2)! with h_n the
        // complete homogeneous symmetric polynomials.
        let m = (a + b + c) / 3.0;
        let (x, y, z) = (a - m, b - m, c - m);
        let (mut px, mut h2, mut h3) = (C1, C1, C1);
        let mut fact = 2.0;
        let mut sum = C1 / fact;
        for n in 1..18 {
            px *= x;
            h2 = y * h2 + px;
            h3 = z * h3 + h2;
            fact *= (n + 2) as f64;
            sum += h3 / fact;
        }
        m.exp() * sum
    } else {
        (dd2(pts[k], pts[j]) - dd2(pts[i], pts[k])) / (pts[j] - pts[i])
    }
}

/// ∫₀^T e^{rt}dt.
pub fn int_exp(r: C64, t: f64) -> C64 {
    t * dd2(C0, r * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn eigenvalues(&self) -> [C64; 2] {
        let m = &self.0;
        let half_tr = 0.5 * (m[0][0] + m[1][1]);
        let half_diff = 0.5 * (m[0][0] - m[1][1]);
        let root = (half_diff * half_diff + m[0][1] * m[1][0]).sqrt();
        [half_tr + root, half_tr - root]
    }

    /// Eigenvalues with their spectral projectors P_μ = (M − E_ν)/(E_μ − E_ν).
    pub fn eigen(&self) -> Result<Eigen2> {
        let e = self.eigenvalues();
        let gap = e[0] - e[1];
        let scale = self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        if gap.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Solver("degenerate 2×2 block: eigenvalues coincide".into()));
        }
        let proj = |mu: usize, nu: usize| {
            let d = e[mu] - e[nu];
            let m = &self.0;
            Mat2([
                [(m[0][0] - e[nu]) / d, m[0][1] / d],
                [m[1][0] / d, (m[1][1] - e[nu]) / d],
            ])
        };
        Ok(Eigen2 { values: e, proj: [proj(0, 1), proj(1, 0)] })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Eigen2 {
    pub values: [C64; 2],
    pub proj: [Mat2; 2],
}

impl Eigen2 {
    /// Growth rates −iE_μ of y' = −iMy.
    pub fn rates(&self) -> [C64; 2] {
        [C64::new(0.0, -1.0) * self.values[0], C64::new(0.0, -1.0) * self.values[1]]
    }
}

/// Vector exponential term c·e^{rt}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub c: [C64; 2],
    pub r: C64,
}

/// Scalar exponential term c·e^{rt}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub c: C64,
    pub r: C64,
}

/// Two-time vector term c·e^{p(t−u)}e^{qu}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTime {
    pub c: [C64; 2],
    pub p: C64,
    pub q: C64,
}

/// Two-time scalar term c·e^{p(t−u)}e^{qu}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTimeScalar {
    pub c: C64,
    pub p: C64,
    pub q: C64,
}

impl TwoTime {
    pub fn component(&self, i: usize) -> TwoTimeScalar {
        TwoTimeScalar { c: self.c[i], p: self.p, q: self.q }
    }
}

/// ∫₀^T |Σ c e^{p(T−u)+qu}|² du at fixed observation time T.
pub fn fixed_abs2(terms: &[TwoTimeScalar], t: f64) -> f64 {
    let mut acc = C0;
    for x in terms {
        for y in terms {
            acc += x.c * y.c.conj() * t * dd2((x.p + y.p.conj()) * t, (x.q + y.q.conj()) * t);
        }
    }
    acc.re
}

/// ∫₀^T dt ∫₀^t du |Σ c e^{p(t−u)+qu}|².
pub fn triangle_abs2(terms: &[TwoTimeScalar], t: f64) -> f64 {
    let mut acc = C0;
    for x in terms {
        for y in terms {
            acc += x.c * y.c.conj() * t * t * dd3(C0, (x.p + y.p.conj()) * t, (x.q + y.q.conj()) * t);
        }
    }
    acc.re
}

pub fn eval_modes(modes: &[Mode], t: f64) -> [C64; 2] {
    modes.iter().fold([C0, C0], |acc, m| {
        let e = (m.r * t).exp();
        [acc[0] + m.c[0] * e, acc[1] + m.c[1] * e]
    })
}

pub fn eval_terms(terms: &[Term], t: f64) -> C64 {
    terms.iter().map(|x| x.c * (x.r * t).exp()).sum()
}

/// Projects vector modes onto a linear functional (α, β).
pub fn project(modes: &[Mode], alpha: C64, beta: C64) -> Vec<Term> {
    modes.iter().map(|m| Term { c: alpha * m.c[0] + beta * m.c[1], r: m.r }).collect()
}

/// ∫₀^T |Σ c e^{rt}|² dt.
pub fn int_abs2(terms: &[Term], t: f64) -> f64 {
    let mut acc = C0;
    for x in terms {
        for y in terms {
            acc += x.c * y.c.conj() * int_exp(x.r + y.r.conj(), t);
        }
    }
    acc.re
}

/// ∫₀^T conj(a(t))·b(t) dt for scalar sums a and b.
pub fn int_overlap(a: &[Term], b: &[Term], t: f64) -> C64 {
    let mut acc = C0;
    for x in a {
        for y in b {
            acc += x.c.conj() * y.c * int_exp(x.r.conj() + y.r, t);
        }
    }
    acc
}

/// Solves y' = −iMy + Σ v·e^{st} with y(0) = y0 as an exact exponential sum.
///
/// A forcing rate that coincides with a mode rate (secular term) is shifted by
/// 1e−6/horizon, which perturbs the solution at the 1e−6 relative level only
/// on the resonant pair; this never happens for physical parameters.
pub fn solve_linear(eig: &Eigen2, y0: [C64; 2], forcing: &[Mode], horizon: f64) -> Vec<Mode> {
    let rates = eig.rates();
    let mut out = Vec::with_capacity(2 + 2 * forcing.len());
    for mu in 0..2 {
        out.push(Mode { c: eig.proj[mu].apply(y0), r: rates[mu] });
    }
    for f in forcing {
        let mut s = f.r;
        for mu in 0..2 {
            let mut den = s - rates[mu];
            if den.norm() * horizon < 1e-6 {
                s += 1e-6 / horizon;
                den = s - rates[mu];
            }
            let pv = eig.proj[mu].apply(f.c);
            let c = [pv[0] / den, pv[1] / den];
            out.push(Mode { c, r: s });
            out.push(Mode { c: [-c[0], -c[1]], r: rates[mu] });
        }
    }
    merge_modes(out)
}

/// Combines terms that share a rate exactly.
fn merge_modes(modes: Vec<Mode>) -> Vec<Mode> {
    let mut out: Vec<Mode> = Vec::with_capacity(modes.len());
    for m in modes {
        if let Some(x) = out.iter_mut().find(|x| x.r == m.r) {
            x.c[0] += m.c[0];
            x.c[1] += m.c[1];
        } else {
            out.push(m);
        }
    }
    out
}
