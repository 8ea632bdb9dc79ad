use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use qread_core::config::RunConfig;
use qread_core::dispersive::{click_probability, contrast_dispersive, Branch, Counting};
use qread_core::optimizer::{
    cmax_curve, contrast_map, numeric_optimize, Bounds, Evaluator, MapCell, OptimizeOptions, Range, Schedule, Sweep,
};
use qread_core::output::{fmt_num, Cell, Csv};
use qread_core::presets::{table, TableId, TableRow};
use qread_core::transport::{contrast_point, full_contrast, grid_convergence, CONVERGED_DELTA};
use qread_core::units::{ghz, mhz, to_ghz, to_mhz, to_us, us};
use qread_core::{derive_couplings, make_dimensionless, validate_regime_with, RegimeReport};

use crate::fail::Failure;
use crate::{Common, GridFlags, MapRanges, Model, SearchFlags, SweepKind};

type Outcome = Result<(), Failure>;

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let cfg = RunConfig::from_path(&common.config)?;
    let d = derive_couplings(&cfg.system)?;
    let report = validate_regime_with(&cfg.system, &cfg.pulse, &cfg.thresholds)?;
    if !report.all_ok() {
        let w = report.warnings().join("; ");
        if common.strict {
            return Err(Failure::Regime(format!("regime check failed: {w}")));
        }
        eprintln!("warning: {w}");
    }
    if d.lambda == 0.0 {
        eprintln!("warning: g = 0, the qubit is decoupled");
    }
    Ok(cfg)
}

fn out_path(common: &Common, cfg: &RunConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| cfg.out.clone())
}

/// Writes to `path`, or to stdout when there is none.
fn emit(csv: &Csv, path: Option<&Path>) -> Outcome {
    match path {
        Some(p) => csv.write_to(BufWriter::new(File::create(p)?))?,
        None => csv.write_to(io::stdout().lock())?,
    }
    Ok(())
}

fn line(label: &str, value: String) {
    println!("{label:<22}{value}");
}

fn regime_lines(r: &RegimeReport, cfg: &RunConfig) {
    let flag = |ok: bool| if ok { "ok" } else { "VIOLATED" };
    let th = &cfg.thresholds;
    line("4 lambda^2", format!("{:.6e}  (limit {}) {}", r.four_lambda_sq, th.four_lambda_sq, flag(r.dispersive_ok)));
    line("(Lambda/lambda)^2", format!("{:.6e}  (limit {}) {}", r.lambda_ratio_sq, th.lambda_ratio_sq, flag(r.bloch_siegert_ok)));
    line(
        "kappa/omega_r",
        format!("{:.6e}  (limit {}) {}", r.kappa_over_omega_r, th.kappa_over_omega, flag(r.underdamped_ok)),
    );
    line("chi t_ph", format!("{:.6}", r.chi_t_ph));
}

pub fn derive(common: &Common) -> Outcome {
    let cfg = load(common)?;
    let p = &cfg.system;
    let d = derive_couplings(p)?;
    let group = make_dimensionless(p, &cfg.pulse)?;
    let report = validate_regime_with(p, &cfg.pulse, &cfg.thresholds)?;
    let t_p = d.t_purcell_for(cfg.purcell_rate);

    line("omega_q/2pi [GHz]", format!("{:.9}", to_ghz(p.omega_q)));
    line("omega_r/2pi [GHz]", format!("{:.9}", to_ghz(p.omega_r)));
    line("g/2pi [MHz]", format!("{:.6}", to_mhz(p.g)));
    line("kappa/2pi [MHz]", format!("{:.6}", to_mhz(p.kappa)));
    line("lambda", format!("{:.6}", d.lambda));
    line("Lambda", format!("{:.6}", d.lambda_bs));
    line("chi/2pi [MHz]", format!("{:.6}", to_mhz(d.chi)));
    line("kappa_q/2pi [MHz]", format!("{:.6}", to_mhz(d.kappa_q)));
    line("T_Purcell [us]", format!("{:.6}", to_us(t_p)));
    line("omega_up/2pi [GHz]", format!("{:.9}", to_ghz(d.omega_eff_up)));
    line("omega_down/2pi [GHz]", format!("{:.9}", to_ghz(d.omega_eff_down)));
    line("K = kappa t_ph", format!("{:.6}", group.k));
    line("X = chi t_ph", format!("{:.6}", group.x));
    line("D_up, D_down", format!("{:.6}, {:.6}", group.d_up, group.d_down));
    regime_lines(&report, &cfg);

    if let Some(path) = out_path(common, &cfg) {
        let mut csv = Csv::new(&["quantity", "value", "unit"]);
        let rows: [(&str, f64, &str); 14] = [
            ("omega_q", to_ghz(p.omega_q), "GHz"),
            ("omega_r", to_ghz(p.omega_r), "GHz"),
            ("g", to_mhz(p.g), "MHz"),
            ("kappa", to_mhz(p.kappa), "MHz"),
            ("lambda", d.lambda, ""),
            ("Lambda", d.lambda_bs, ""),
            ("chi", to_mhz(d.chi), "MHz"),
            ("kappa_q", to_mhz(d.kappa_q), "MHz"),
            ("t_purcell", to_us(t_p), "us"),
            ("K", group.k, ""),
            ("X", group.x, ""),
            ("four_lambda_sq", report.four_lambda_sq, ""),
            ("lambda_ratio_sq", report.lambda_ratio_sq, ""),
            ("kappa_over_omega_r", report.kappa_over_omega_r, ""),
        ];
        for (q, v, u) in rows {
            csv.push(vec![q.into(), v.into(), u.into()]);
        }
        emit(&csv, Some(&path))?;
    }
    Ok(())
}

pub fn contrast(common: &Common, model: Model, grid: &GridFlags) -> Outcome {
    let cfg = load(common)?;
    let p = &cfg.system;
    let mut csv = Csv::new(&["model", "contrast", "click_up", "click_down", "p_up", "norm_up", "norm_down"]);
    match model {
        Model::Dispersive => {
            let group = make_dimensionless(p, &cfg.pulse)?;
            let counting = Counting::Finite(group.tau_of(cfg.t_m));
            let up = click_probability(group.k, group.x, Branch::General(group.d_up), p.eta, counting)?.value;
            let down = click_probability(group.k, group.x, Branch::General(group.d_down), p.eta, counting)?.value;
            line("model", "dispersive".into());
            line("C_d", format!("{:.6}", up - down));
            line("P_click|up", format!("{up:.6}"));
            line("P_click|down", format!("{down:.6}"));
            csv.push(vec!["dispersive".into(), (up - down).into(), up.into(), down.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into()]);
        }
        Model::Full => {
            let r = full_contrast(p, &cfg.pulse, cfg.t_m, &cfg.solver)?;
            line("model", "full".into());
            line("C_n", format!("{:.6}", r.c_n));
            line("P_click|up", format!("{:.6}", r.click_up));
            line("P_click|down", format!("{:.6}", r.click_down));
            line("P_up(t_m)", format!("{:.6}", r.p_up));
            line("norm up, down", format!("{:.9}, {:.9}", r.up.norm, r.down.norm));
            line("expansion terms", format!("{}", r.up.meta.terms));
            csv.push(vec![
                "full".into(),
                r.c_n.into(),
                r.click_up.into(),
                r.click_down.into(),
                r.p_up.into(),
                r.up.norm.into(),
                r.down.norm.into(),
            ]);
            if grid.grid_nodes.is_some() || grid.grid_span.is_some() || grid.tol.is_some() {
                grid_check(&cfg, grid)?;
            }
        }
    }
    if let Some(path) = out_path(common, &cfg) {
        emit(&csv, Some(&path))?;
    }
    Ok(())
}

fn grid_check(cfg: &RunConfig, flags: &GridFlags) -> Outcome {
    let nodes = flags.grid_nodes.unwrap_or(cfg.grid.nodes);
    let span = flags.grid_span.unwrap_or(cfg.grid.span);
    let tol = flags.tol.unwrap_or(CONVERGED_DELTA);
    if !(tol > 0.0) {
        return Err(Failure::Config("--tol must be > 0".into()));
    }
    let rep = grid_convergence(&cfg.system, &cfg.pulse, cfg.t_m, &cfg.solver, flags.grid_levels, nodes, span)?;
    println!("k-grid check (nodes, span [rad/s], C_n, change, error vs exact):");
    for l in &rep.levels {
        let delta = l.delta.map_or("-".to_string(), |d| format!("{d:+.3e}"));
        println!("  {:>7} {:.4e} {:.6} {:>11} {:+.3e}", l.nodes, l.span, l.c_n, delta, l.error);
    }
    let converged = rep.levels.last().and_then(|l| l.delta).is_some_and(|d| d.abs() < tol);
    line("grid converged", format!("{converged} (tol {tol:e})"));
    Ok(())
}

fn table_outcome(row: &TableRow) -> Result<[f64; 3], Failure> {
    let p = row.system()?;
    let pulse = row.pulse()?;
    let d = derive_couplings(&p)?;
    let ratio = row.table.tm_over_tph();
    let c_d = contrast_dispersive(p.kappa * pulse.t_ph, d.chi * pulse.t_ph, p.eta, Some(ratio))?;
    let (c_n, p_up) = contrast_point(&p, &pulse, row.t_m_seconds(), &Default::default())?;
    Ok([c_d, c_n, p_up])
}

pub fn tables(which: &str, out: Option<&Path>) -> Outcome {
    let id: TableId = which.parse().map_err(Failure::Config)?;
    let mut csv = Csv::new(&["table", "row", "quantity", "reference_pct", "computed_pct", "delta_pp", "status"]);
    let mut failed = 0;
    for row in table(id) {
        let reference = [row.c_d, row.c_n, row.p_up];
        let names = ["C_d", "C_n", "P_up"];
        match table_outcome(&row) {
            Ok(v) => {
                for k in 0..3 {
                    let pct = 100.0 * v[k];
                    csv.push(vec![
                        id.label().into(),
                        row.index.into(),
                        names[k].into(),
                        reference[k].into(),
                        pct.into(),
                        (pct - reference[k]).into(),
                        "ok".into(),
                    ]);
                }
            }
            Err(e) => {
                failed += 1;
                eprintln!("row {}: {e}", row.index);
                for k in 0..3 {
                    csv.push(vec![
                        id.label().into(),
                        row.index.into(),
                        names[k].into(),
                        reference[k].into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        Cell::Text(format!("error: {e}")),
                    ]);
                }
            }
        }
    }
    emit(&csv, out)?;
    if failed > 0 {
        return Err(Failure::Solver(format!("{failed} row(s) failed")));
    }
    Ok(())
}

fn parse_span(s: &str, what: &str, with_points: bool) -> Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || {
        let shape = if with_points { "lo:hi:points" } else { "lo:hi" };
        Failure::Config(format!("{what}: expected {shape}, got '{s}'"))
    };
    let want = if with_points { 3 } else { 2 };
    if parts.len() != want {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = if with_points { parts[2].trim().parse().map_err(|_| bad())? } else { 0 };
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Failure::Config(format!("{what}: need 0 < lo < hi, got '{s}'")));
    }
    Ok((lo, hi, n))
}

fn evaluator(model: Model, cfg: &RunConfig) -> Evaluator {
    match model {
        Model::Full => Evaluator::Full(cfg.solver),
        Model::Dispersive => Evaluator::Dispersive,
    }
}

fn schedule(cfg: &RunConfig) -> Result<Schedule, Failure> {
    Ok(Schedule::new(cfg.t_m, cfg.tm_over_tph())?)
}

fn cell_row(c: &MapCell) -> Vec<Cell> {
    vec![to_mhz(c.g).into(), to_mhz(c.kappa).into(), c.c_n.into(), c.p_up.into(), c.valid.into()]
}

const MAP_HEADER: [&str; 5] = ["g_mhz", "kappa_mhz", "c_n", "p_up", "valid"];

pub fn map(common: &Common, ranges: &MapRanges, model: Model, gnuplot: Option<&Path>) -> Outcome {
    let cfg = load(common)?;
    let (glo, ghi, gn) = parse_span(&ranges.g_mhz, "--g-mhz", true)?;
    let (klo, khi, kn) = parse_span(&ranges.kappa_mhz, "--kappa-mhz", true)?;
    let m = contrast_map(
        &cfg.system,
        &schedule(&cfg)?,
        Range::new(mhz(glo), mhz(ghi), gn)?,
        Range::new(mhz(klo), mhz(khi), kn)?,
        &evaluator(model, &cfg),
    )?;
    let mut csv = Csv::new(&MAP_HEADER);
    for c in &m.cells {
        csv.push(cell_row(c));
    }
    let out = out_path(common, &cfg);
    emit(&csv, out.as_deref())?;
    let invalid = m.cells.iter().filter(|c| !c.valid).count();
    match m.best() {
        Some(b) => eprintln!(
            "max C_n = {} at g/2pi = {} MHz, kappa/2pi = {} MHz ({}; {} invalid cells)",
            fmt_num(b.c_n),
            fmt_num(to_mhz(b.g)),
            fmt_num(to_mhz(b.kappa)),
            if m.max_is_interior() { "interior" } else { "on the range boundary" },
            invalid
        ),
        None => return Err(Failure::Solver("every map cell failed".into())),
    }
    if let Some(g) = gnuplot {
        let data = out.as_deref().map_or("map.csv".to_string(), |p| p.display().to_string());
        write_script(
            g,
            &format!(
                "set datafile separator ','\nset view map\nset xlabel 'kappa/2pi [MHz]'\nset ylabel 'g/2pi [MHz]'\n\
                 set cblabel 'C_n'\nsplot '{data}' every ::1 using 2:1:($5 == 1 ? $3 : 1/0) with points pt 5 palette notitle\n"
            ),
        )?;
    }
    Ok(())
}

fn write_script(path: &Path, body: &str) -> Outcome {
    let mut f = File::create(path)?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

fn search_setup(flags: &SearchFlags, cfg: &RunConfig) -> Result<(Bounds, OptimizeOptions), Failure> {
    let (glo, ghi, _) = parse_span(&flags.g_mhz, "--g-mhz", false)?;
    let (klo, khi, _) = parse_span(&flags.kappa_mhz, "--kappa-mhz", false)?;
    if flags.coarse < 2 {
        return Err(Failure::Config("--coarse must be at least 2".into()));
    }
    let bounds = Bounds::new((mhz(glo), mhz(ghi)), (mhz(klo), mhz(khi)))?;
    let opts = OptimizeOptions { evaluator: evaluator(flags.model, cfg), coarse: flags.coarse, ..Default::default() };
    Ok((bounds, opts))
}

pub fn optimize(common: &Common, flags: &SearchFlags, samples: Option<&Path>) -> Outcome {
    let cfg = load(common)?;
    let (bounds, opts) = search_setup(flags, &cfg)?;
    let o = numeric_optimize(&cfg.system, &schedule(&cfg)?, &bounds, &opts)?;
    line("C_max", format!("{:.6}", o.c_max));
    line("g/2pi [MHz]", format!("{:.6}", to_mhz(o.g_opt)));
    line("kappa/2pi [MHz]", format!("{:.6}", to_mhz(o.kappa_opt)));
    line("P_up(t_m)", format!("{:.6}", o.p_up));
    line("evaluations", format!("{}", o.evaluations));
    if o.boundary_pinned {
        eprintln!("warning: optimum is on the search boundary; widen the bounds");
    }
    if let Some(path) = out_path(common, &cfg) {
        let mut csv = Csv::new(&["g_mhz", "kappa_mhz", "c_max", "p_up", "boundary_pinned", "evaluations"]);
        csv.push(vec![
            to_mhz(o.g_opt).into(),
            to_mhz(o.kappa_opt).into(),
            o.c_max.into(),
            o.p_up.into(),
            o.boundary_pinned.into(),
            o.evaluations.into(),
        ]);
        emit(&csv, Some(&path))?;
    }
    if let Some(path) = samples {
        let mut csv = Csv::new(&MAP_HEADER);
        for c in &o.samples {
            csv.push(cell_row(c));
        }
        emit(&csv, Some(path))?;
    }
    Ok(())
}

pub fn curve(
    common: &Common,
    flags: &SearchFlags,
    kind: SweepKind,
    values: &[f64],
    ratio: f64,
    gnuplot: Option<&Path>,
) -> Outcome {
    let cfg = load(common)?;
    let (bounds, opts) = search_setup(flags, &cfg)?;
    if values.len() < 3 {
        return Err(Failure::Config("a curve needs at least 3 sweep values".into()));
    }
    let sweep = match kind {
        SweepKind::PulseDuration => Sweep::PulseDuration(values.iter().map(|&v| us(v)).collect()),
        SweepKind::Detuning => Sweep::Detuning { values: values.iter().map(|&v| ghz(v)).collect(), ratio },
    };
    let c = cmax_curve(&sweep, &cfg.system, &schedule(&cfg)?, &bounds, &opts)?;
    let mut csv = Csv::new(&[
        "value",
        "omega_q_ghz",
        "omega_r_ghz",
        "t_m_us",
        "g_mhz",
        "kappa_mhz",
        "c_max",
        "p_up",
        "boundary_pinned",
    ]);
    for (pt, &raw) in c.points.iter().zip(values) {
        csv.push(vec![
            raw.into(),
            to_ghz(pt.omega_q).into(),
            to_ghz(pt.omega_r).into(),
            to_us(pt.t_m).into(),
            to_mhz(pt.optimum.g_opt).into(),
            to_mhz(pt.optimum.kappa_opt).into(),
            pt.optimum.c_max.into(),
            pt.optimum.p_up.into(),
            pt.optimum.boundary_pinned.into(),
        ]);
    }
    let out = out_path(common, &cfg);
    emit(&csv, out.as_deref())?;
    if c.increasing {
        eprintln!("C_max increases monotonically along the sweep");
    } else {
        eprintln!("C_max not monotone; drops after sweep indices {:?}", c.violations);
    }
    if let Some(g) = gnuplot {
        let data = out.as_deref().map_or("curve.csv".to_string(), |p| p.display().to_string());
        let xlabel = match kind {
            SweepKind::PulseDuration => "t_m [us]",
            SweepKind::Detuning => "(omega_q - omega_r)/2pi [GHz]",
        };
        write_script(
            g,
            &format!(
                "set datafile separator ','\nset xlabel '{xlabel}'\nset ylabel 'C_max'\n\
                 plot '{data}' every ::1 using 1:7 with linespoints notitle\n"
            ),
        )?;
    }
    Ok(())
}
