//! Acceptance run: one PASS/FAIL line per criterion, details indented below.
//! Exits non-zero when any criterion is red.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::process::ExitCode;
use std::time::Instant;

use qread_core::dispersive::{
    contrast_approx, contrast_dispersive, contrast_for_group, finite_time_delta, optimal_cavity_decay,
};
use qread_core::optimizer::{analytic_plan, cmax_curve, Bounds, DesignTargets, OptimizeOptions, Schedule, Sweep};
use qread_core::presets::{table, TableId, TableRow};
use qread_core::quad::{integrate_real, QuadOptions};
use qread_core::transport::{full_contrast, grid_convergence, solve_excited, solve_ground, two_excitation_state, KGrid};
use qread_core::units::{ghz, mhz, to_ghz, us};
use qread_core::{
    derive_couplings, make_dimensionless, pulse_spectrum, KappaQ, PulseParams, SolverOptions, SystemParams,
};

/// Percentage-point tolerances for table reproduction.
const TOL_TABLE_II_CD: f64 = 0.5;
const TOL_TABLE_I_CD: f64 = 0.2;
const TOL_TABLE_CN: f64 = 1.0;
const MAX_CD_SECONDS: f64 = 1.0;
const MAX_FAST_ROW_SECONDS: f64 = 600.0;
const MAX_SLOW_ROW_SECONDS: f64 = 1800.0;
/// Grid refinement behind the fast-table check: 4 levels from 200 nodes per cluster, span 20.
const GRID_LEVELS: usize = 4;
const GRID_NODES: usize = 200;
const GRID_SPAN: f64 = 20.0;
const TOL_K_OPT: f64 = 1e-3;
const TOL_APPROX_PP: f64 = 0.1;
const TOL_DELTA_REL: f64 = 0.2;
const TOL_CHAIN: f64 = 1e-10;
const TOL_PULSE_NORM: f64 = 1e-9;
const TOL_SINGLE_NORM: f64 = 1e-4;
const TOL_DISPERSIVE_LIMIT_PP: f64 = 0.2;
const TOL_PURCELL_REL: f64 = 0.1;

type Criterion = fn() -> Verdict;

struct Verdict {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>, details: Vec<String>) -> Self {
        Self { pass, summary: summary.into(), details }
    }
}

fn pp(x: f64) -> f64 {
    100.0 * x
}

fn rows(id: TableId) -> Vec<TableRow> {
    table(id)
}

fn c_d(row: &TableRow) -> f64 {
    let p = row.system().unwrap();
    let pulse = row.pulse().unwrap();
    let g = make_dimensionless(&p, &pulse).unwrap();
    contrast_for_group(&g, 1.0, Some(row.table.tm_over_tph())).unwrap()
}

fn dispersive_table(id: TableId, tol: f64) -> Verdict {
    let start = Instant::now();
    let computed: Vec<f64> = rows(id).iter().map(c_d).collect();
    let secs = start.elapsed().as_secs_f64();
    let mut pass = secs < MAX_CD_SECONDS;
    let mut details = Vec::new();
    for (row, c) in rows(id).iter().zip(&computed) {
        let dev = pp(*c) - row.c_d;
        let ok = dev.abs() <= tol;
        pass &= ok;
        details.push(format!(
            "row {}: C_d {:.2}% vs {:.1}% ({:+.2} pp) {}",
            row.index,
            pp(*c),
            row.c_d,
            dev,
            if ok { "ok" } else { "out" }
        ));
    }
    Verdict::new(pass, format!("Table {} C_d within ±{tol} pp, {secs:.3} s total", id.label()), details)
}

fn criterion_1() -> Verdict {
    dispersive_table(TableId::II, TOL_TABLE_II_CD)
}

fn criterion_2() -> Verdict {
    dispersive_table(TableId::I, TOL_TABLE_I_CD)
}

fn transport_row(row: &TableRow, with_grid: bool, max_secs: f64) -> (bool, String) {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let r = full_contrast(&row.system().unwrap(), &row.pulse().unwrap(), row.t_m_seconds(), &opts).unwrap();
    let dc = pp(r.c_n) - row.c_n;
    let dp = pp(r.p_up) - row.p_up;
    let mut ok = dc.abs() <= TOL_TABLE_CN && dp.abs() <= TOL_TABLE_CN;
    let mut grid_note = String::new();
    if with_grid {
        let rep = grid_convergence(
            &row.system().unwrap(),
            &row.pulse().unwrap(),
            row.t_m_seconds(),
            &opts,
            GRID_LEVELS,
            GRID_NODES,
            GRID_SPAN,
        )
        .unwrap();
        let fine = rep.levels.last().unwrap();
        let grid_ok = rep.within_exact || rep.converged;
        ok &= grid_ok;
        grid_note = format!(
            "; grid {} nodes: C_n {:.3}%, |grid − exact| {:.4} pp, last change {:.4} pp",
            fine.nodes,
            pp(fine.c_n),
            pp(fine.error.abs()),
            pp(fine.delta.unwrap_or(f64::NAN).abs()),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < max_secs;
    let line = format!(
        "row {}: C_n {:.2}% vs {:.1}% ({:+.2} pp), P↑ {:.2}% vs {:.1}% ({:+.2} pp){grid_note}, {secs:.1} s {}",
        row.index,
        pp(r.c_n),
        row.c_n,
        dc,
        pp(r.p_up),
        row.p_up,
        dp,
        if ok { "ok" } else { "out" }
    );
    (ok, line)
}

fn criterion_3() -> Verdict {
    let mut pass = true;
    let mut details = Vec::new();
    for row in rows(TableId::II) {
        let (ok, line) = transport_row(&row, true, MAX_FAST_ROW_SECONDS);
        pass &= ok;
        details.push(line);
    }
    Verdict::new(pass, format!("Table II C_n and P↑ within ±{TOL_TABLE_CN} pp, grid-checked"), details)
}

fn criterion_4() -> Verdict {
    let mut pass = true;
    let mut details = Vec::new();
    for row in rows(TableId::I) {
        let (ok, line) = transport_row(&row, false, MAX_SLOW_ROW_SECONDS);
        pass &= ok;
        details.push(line);
    }
    Verdict::new(pass, format!("Table I C_n and P↑ within ±{TOL_TABLE_CN} pp"), details)
}

/// Golden-section search for the maximum of a unimodal function.
fn argmax(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-11 * b {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn criterion_5() -> Verdict {
    let mut pass = true;
    let mut details = Vec::new();
    for x in [0.5, 3.64, 10.0, 100.0, 1000.0] {
        let closed = optimal_cavity_decay(x).unwrap();
        let brute = argmax(|k| contrast_dispersive(k, x, 1.0, None).unwrap(), 1e-3, 1e5);
        let rel = (closed / brute - 1.0).abs();
        pass &= rel < TOL_K_OPT;
        details.push(format!("X = {x}: K_opt {closed:.6}, brute force {brute:.6}, rel {rel:.1e}"));
    }
    Verdict::new(pass, format!("closed-form K_opt vs brute-force argmax within {TOL_K_OPT:e}"), details)
}

fn criterion_6() -> Verdict {
    let mut pass = true;
    let mut details = Vec::new();
    for x in [100.0, 300.0, 1000.0] {
        let k = optimal_cavity_decay(x).unwrap();
        let exact = contrast_dispersive(k, x, 1.0, None).unwrap();
        let approx = contrast_approx(k, x, 1.0).value;
        let err = pp((approx - exact).abs());
        pass &= err <= TOL_APPROX_PP;
        details.push(format!("X = {x}: exact {:.4}%, approx {:.4}%, |diff| {err:.4} pp", pp(exact), pp(approx)));
    }
    Verdict::new(pass, format!("1 − 3/(2K) within {TOL_APPROX_PP} pp at K_opt"), details)
}

fn criterion_7() -> Verdict {
    let mut pass = true;
    let mut details = Vec::new();
    for (tau, expected) in [(6.0, 0.003), (3.0, 0.05)] {
        let d = finite_time_delta(10.0, 0.0, tau).unwrap();
        let rel = (d / expected - 1.0).abs();
        pass &= rel <= TOL_DELTA_REL;
        details.push(format!("Δ(τ_m = {tau}, K = 10, D = 0) = {:.3}% vs ≈{:.1}% (rel {rel:.2})", pp(d), pp(expected)));
    }
    Verdict::new(pass, format!("finite-counting Δ within {:.0}% relative", 100.0 * TOL_DELTA_REL), details)
}

fn criterion_8() -> Verdict {
    let targets = DesignTargets {
        epsilon: 0.003,
        ratio_lambda_lambda_bs: 10.0,
        omega_q: ghz(5.0),
        ratio_tm_tph: 6.0,
        ratio_tm_tp: 0.1,
    };
    let plan = analytic_plan(&targets).unwrap();
    let ratio = targets.epsilon / (plan.lambda * plan.lambda);
    let rel = (ratio / 45.0 - 1.0).abs();
    let wr = to_ghz(plan.system.omega_r);
    let residual = plan.residuals().unwrap().max();
    let pass = rel < TOL_CHAIN && residual < TOL_CHAIN && format!("{wr:.4}") == "4.0909";
    Verdict::new(
        pass,
        "analytic chain self-consistent",
        vec![
            format!("ε/λ² = {ratio:.12} (rel {rel:.1e}); max plan residual {residual:.1e}"),
            format!("ω_r/2π = {wr:.6} GHz"),
        ],
    )
}

fn fast_row() -> (SystemParams, PulseParams, f64) {
    let row = rows(TableId::II)[0];
    (row.system().unwrap(), row.pulse().unwrap(), row.t_m_seconds())
}

fn purcell_rate_ratio(p: &SystemParams) -> f64 {
    let d = derive_couplings(p).unwrap();
    let t_m = 2.0 * d.t_purcell;
    let opts = SolverOptions { probe: false, curve_points: 5, ..SolverOptions::default() };
    let pulse = PulseParams::resonant_up(p, t_m / 6.0, 0.0).unwrap();
    let run = solve_excited(p, &pulse, t_m, &opts).unwrap();
    let (a, b) = (run.curve[1], run.curve[4]);
    let rate = -(b.qubit_population / a.qubit_population).ln() / (b.t - a.t);
    rate / (p.kappa * d.lambda * d.lambda)
}

fn criterion_9() -> Verdict {
    let mut details = Vec::new();
    let mut pass = true;
    let mut check = |ok: bool, line: String| {
        pass &= ok;
        details.push(format!("{} {line}", if ok { "ok " } else { "out" }));
    };

    let pulse = PulseParams::new(us(0.2), 0.0, ghz(4.1)).unwrap();
    let gamma = 0.5 / pulse.t_ph;
    let norm = integrate_real(
        |th| pulse_spectrum(&pulse, pulse.omega_ph + gamma * th.tan()).norm_sqr() * gamma / th.cos().powi(2),
        -FRAC_PI_2,
        FRAC_PI_2,
        QuadOptions::default(),
    )
    .unwrap();
    check((norm - 1.0).abs() < TOL_PULSE_NORM, format!("pulse ∫|ξ|² − 1 = {:.1e}", norm - 1.0));

    let eq = SolverOptions { kappa_q: KappaQ::EqualKappa, ..SolverOptions::default() };
    let worst = rows(TableId::II)
        .iter()
        .chain(rows(TableId::I).iter())
        .map(|r| (solve_ground(&r.system().unwrap(), &r.pulse().unwrap(), r.t_m_seconds(), &eq).unwrap().norm - 1.0).abs())
        .fold(0.0, f64::max);
    check(worst < TOL_SINGLE_NORM, format!("single-excitation norm drift {worst:.1e} over all table rows"));

    let (p, pulse, t_m) = fast_row();
    let opts = SolverOptions::default();
    let grid = KGrid::for_run(&p, &pulse, t_m, &opts, 60, 10.0).unwrap();
    let asym = two_excitation_state(&p, &pulse, t_m, &opts, &grid, t_m).unwrap().pair_asymmetry();
    check(asym == 0.0, format!("pair field max |Φ(k,k′) − Φ(k′,k)| = {asym:e} on {} nodes", grid.len()));

    let p0 = SystemParams::new(ghz(5.0), ghz(4.09), mhz(13.65), 1.0, 1.0).unwrap();
    let t_ph = 3.0 / derive_couplings(&p0).unwrap().chi;
    let pl = p0.with_kappa(4.0 / t_ph);
    let dl = derive_couplings(&pl).unwrap();
    let pulse_l = PulseParams::resonant_up(&pl, t_ph, 0.0).unwrap();
    let full = full_contrast(&pl, &pulse_l, 6.0 * t_ph, &opts).unwrap();
    let closed = contrast_for_group(&make_dimensionless(&pl, &pulse_l).unwrap(), 1.0, Some(6.0)).unwrap();
    check(
        pp((full.c_n - closed).abs()) < TOL_DISPERSIVE_LIMIT_PP,
        format!(
            "dispersive limit (4λ² = {:.1e}, t_m/T_P = {:.1e}): C_n {:.3}% vs C_d {:.3}%",
            4.0 * dl.lambda * dl.lambda,
            6.0 * t_ph / dl.t_purcell,
            pp(full.c_n),
            pp(closed)
        ),
    );

    let c0 = contrast_dispersive(4.27, 0.0, 1.0, Some(6.0)).unwrap();
    let n0 = full_contrast(&p.with_g(0.0), &pulse, t_m, &opts).unwrap().c_n;
    check(c0 == 0.0 && n0.abs() < 1e-12, format!("X = 0: C_d = {c0:e}, C_n = {n0:.1e}"));

    let xs: Vec<f64> = (0..200).map(|i| 0.01 * 1.05f64.powi(i)).collect();
    let cs: Vec<f64> = xs.iter().map(|&x| contrast_dispersive(4.27, x, 1.0, Some(6.0)).unwrap()).collect();
    check(cs.windows(2).all(|w| w[1] > w[0]), format!("C strictly increasing over {} X values in [0.01, {:.0}]", xs.len(), xs[199]));

    let weak_bs = SystemParams::new(ghz(5.0), ghz(4.8), mhz(10.0), mhz(5.0), 1.0).unwrap();
    let r49 = purcell_rate_ratio(&weak_bs);
    check((r49 - 1.0).abs() < TOL_PURCELL_REL, format!("probe-off decay rate / κλ² = {r49:.4} at λ/Λ = 49"));
    let r10 = purcell_rate_ratio(&p);
    let d10 = derive_couplings(&p).unwrap();
    details.push(format!(
        "    at λ/Λ = 10 (fast row 1) the rate is {r10:.4} κλ², against (1 + Λ/λ)² = {:.4}",
        (1.0 + d10.lambda_bs / d10.lambda).powi(2)
    ));

    Verdict::new(pass, "property suite", details)
}

fn criterion_10() -> Verdict {
    let base = rows(TableId::II)[2].system().unwrap();
    let bounds = Bounds::new((mhz(5.0), mhz(300.0)), (mhz(0.1), mhz(30.0))).unwrap();
    let opts = OptimizeOptions::default();
    let schedule = Schedule::new(us(1.0), 6.0).unwrap();
    let describe = |label: &str, unit: &str, scale: f64, c: &qread_core::optimizer::Curve| {
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|p| {
                let pin = if p.optimum.boundary_pinned { " (bound)" } else { "" };
                format!("{:.3}{unit} → {:.2}%{pin}", p.value * scale, pp(p.optimum.c_max))
            })
            .collect();
        format!("{label}: {}", pts.join(", "))
    };
    let tm = cmax_curve(&Sweep::PulseDuration(vec![us(1.0), us(2.0), us(5.0), us(10.0)]), &base, &schedule, &bounds, &opts)
        .unwrap();
    let det = Sweep::Detuning { values: [0.5, 0.91, 1.82, 3.64].iter().map(|&d| ghz(d)).collect(), ratio: 10.0 };
    let dc = cmax_curve(&det, &base, &schedule, &bounds, &opts).unwrap();
    Verdict::new(
        tm.increasing && dc.increasing,
        "C_max strictly increasing along t_m and detuning sweeps",
        vec![describe("t_m", " μs", 1e6, &tm), describe("Δ/2π at λ/Λ = 10", " GHz", 1.0 / (TAU * 1e9), &dc)],
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
        ("10", criterion_10),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        let v = run();
        println!("[{}] criterion {id:>2}: {}", if v.pass { "PASS" } else { "FAIL" }, v.summary);
        for d in &v.details {
            println!("      {d}");
        }
        if !v.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 10 criteria fail ({})", failed.len(), failed.join(", "));
        ExitCode::FAILURE
    }
}
