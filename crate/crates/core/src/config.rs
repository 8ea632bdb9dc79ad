//! Flat `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Keys are case-sensitive and may appear at most once. Frequencies are
//! ordinary (not angular) and converted by 2π on parse.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `omega_q_ghz`, `omega_r_ghz` | qubit and resonator frequencies | required |
//! | `g_mhz` | coupling | required |
//! | `kappa_mhz` or `kappa_khz` | resonator decay | required |
//! | `eta` | detector efficiency | 1 |
//! | `t_m_us` or `t_m_ms` | counting window | required |
//! | `t_ph_us` or `tm_over_tph` | pulse decay time, directly or as t_m/t_ph | `tm_over_tph = 6` |
//! | `t0_us` | pulse start | 0 |
//! | `omega_ph_ghz` | carrier, or `resonant-up` for ω_r + χ | `resonant-up` |
//! | `purcell_rate` | `kappa` or `kappa_q` | `kappa` |
//! | `max_four_lambda_sq`, `max_lambda_ratio_sq`, `max_kappa_over_omega` | regime thresholds | 0.05, 0.05, 0.01 |
//! | `gr_sign` | `minus` or `plus` | `minus` |
//! | `kappa_q` | `scaled` (κω_q/ω_r) or `equal` | `scaled` |
//! | `accounting` | `output-only` or `complete` | `output-only` |
//! | `bloch_siegert`, `probe` | `true`/`false` | `true` |
//! | `grid_nodes`, `grid_span` | k-grid nodes per cluster and span factor | 200, 40 |
//! | `quad_tol` | relative quadrature tolerance | 1e-10 |
//! | `out` | output path | none |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Carrier, PulseParams, PurcellRate, SystemParams};
use crate::regime::RegimeThresholds;
use crate::transport::{ClickAccounting, GrSign, KappaQ, SolverOptions};
use crate::units::{ghz, khz, mhz, ms, us};

const KEYS: &[&str] = &[
    "omega_q_ghz",
    "omega_r_ghz",
    "g_mhz",
    "kappa_mhz",
    "kappa_khz",
    "eta",
    "t_m_us",
    "t_m_ms",
    "t_ph_us",
    "tm_over_tph",
    "t0_us",
    "omega_ph_ghz",
    "purcell_rate",
    "max_four_lambda_sq",
    "max_lambda_ratio_sq",
    "max_kappa_over_omega",
    "gr_sign",
    "kappa_q",
    "accounting",
    "bloch_siegert",
    "probe",
    "grid_nodes",
    "grid_span",
    "quad_tol",
    "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub nodes: usize,
    pub span: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self { nodes: 200, span: 40.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemParams,
    pub pulse: PulseParams,
    pub carrier: Carrier,
    pub t_m: f64,
    pub purcell_rate: PurcellRate,
    pub thresholds: RegimeThresholds,
    pub solver: SolverOptions,
    pub grid: GridSettings,
    pub quad_tol: f64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { line: 0, msg: format!("cannot read {}: {e}", path.display()) })?;
        text.parse()
    }

    /// t_m/t_ph of this configuration.
    pub fn tm_over_tph(&self) -> f64 {
        self.t_m / self.pulse.t_ph
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Table(BTreeMap<String, Entry>);

impl Table {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.0.remove(key)
    }

    fn num(&mut self, key: &str) -> Result<Option<(usize, f64)>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(|v| Some((e.line, v)))
                .ok_or_else(|| err(e.line, format!("{key}: expected a number, got '{}'", e.value))),
        }
    }

    fn either(&mut self, a: &str, b: &str) -> Result<Option<(usize, f64, bool)>> {
        match (self.num(a)?, self.num(b)?) {
            (Some((la, _)), Some((lb, _))) => Err(err(la.max(lb), format!("give only one of {a} and {b}"))),
            (Some((l, v)), None) => Ok(Some((l, v, true))),
            (None, Some((l, v))) => Ok(Some((l, v, false))),
            (None, None) => Ok(None),
        }
    }

    fn word<T>(&mut self, key: &str, choices: &[(&str, T)]) -> Result<Option<T>>
    where
        T: Copy,
    {
        match self.take(key) {
            None => Ok(None),
            Some(e) => choices.iter().find(|(w, _)| *w == e.value).map(|(_, v)| Some(*v)).ok_or_else(|| {
                let names: Vec<&str> = choices.iter().map(|(w, _)| *w).collect();
                err(e.line, format!("{key}: expected one of {}, got '{}'", names.join(", "), e.value))
            }),
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn at(line: usize, r: Result<SystemParams>) -> Result<SystemParams> {
    r.map_err(|e| err(line, e.to_string()))
}

impl std::str::FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut last = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(err(line, format!("unknown key '{k}'")));
            }
            if v.is_empty() {
                return Err(err(line, format!("{k}: missing value")));
            }
            if let Some(prev) = map.insert(k.to_string(), Entry { line, value: v.to_string() }) {
                return Err(err(line, format!("duplicate key '{k}' (first on line {})", prev.line)));
            }
        }
        let mut t = Table(map);
        let need = |v: Option<(usize, f64)>, key: &str| v.ok_or_else(|| err(last, format!("missing required key {key}")));

        let (_, wq) = need(t.num("omega_q_ghz")?, "omega_q_ghz")?;
        let (_, wr) = need(t.num("omega_r_ghz")?, "omega_r_ghz")?;
        let (lg, g) = need(t.num("g_mhz")?, "g_mhz")?;
        let (lk, kappa, in_mhz) = t.either("kappa_mhz", "kappa_khz")?.ok_or_else(|| err(last, "missing required key kappa_mhz"))?;
        let eta = t.num("eta")?;
        let line_eta = eta.map_or(lg, |e| e.0);
        let kappa = if in_mhz { mhz(kappa) } else { khz(kappa) };
        let system = at(lg.max(lk).max(line_eta), SystemParams::new(ghz(wq), ghz(wr), mhz(g), kappa, eta.map_or(1.0, |e| e.1)))?;

        let (lm, tm, in_us) = t.either("t_m_us", "t_m_ms")?.ok_or_else(|| err(last, "missing required key t_m_us"))?;
        let t_m = if in_us { us(tm) } else { ms(tm) };
        if !(t_m > 0.0) {
            return Err(err(lm, "t_m must be > 0"));
        }
        let t_ph = match (t.num("t_ph_us")?, t.num("tm_over_tph")?) {
            (Some((l, _)), Some(_)) => return Err(err(l, "give only one of t_ph_us and tm_over_tph")),
            (Some((_, v)), None) => us(v),
            (None, Some((_, r))) if r > 0.0 => t_m / r,
            (None, Some((l, _))) => return Err(err(l, "tm_over_tph must be > 0")),
            (None, None) => t_m / 6.0,
        };
        let t0 = t.num("t0_us")?.map_or(0.0, |(_, v)| us(v));
        let (carrier, lc) = match t.take("omega_ph_ghz") {
            None => (Carrier::ResonantUp, lm),
            Some(e) if e.value == "resonant-up" => (Carrier::ResonantUp, e.line),
            Some(e) => match e.value.parse::<f64>() {
                Ok(v) if v.is_finite() => (Carrier::Fixed(ghz(v)), e.line),
                _ => return Err(err(e.line, format!("omega_ph_ghz: expected a number or 'resonant-up', got '{}'", e.value))),
            },
        };
        let omega_ph = carrier.resolve(&system).map_err(|e| err(lc, e.to_string()))?;
        let pulse = PulseParams::new(t_ph, t0, omega_ph).map_err(|e| err(lm, e.to_string()))?;

        let purcell_rate =
            t.word("purcell_rate", &[("kappa", PurcellRate::Kappa), ("kappa_q", PurcellRate::KappaQ)])?.unwrap_or_default();
        let mut thresholds = RegimeThresholds::default();
        for (key, slot) in [
            ("max_four_lambda_sq", &mut thresholds.four_lambda_sq),
            ("max_lambda_ratio_sq", &mut thresholds.lambda_ratio_sq),
            ("max_kappa_over_omega", &mut thresholds.kappa_over_omega),
        ] {
            if let Some((l, v)) = t.num(key)? {
                if !(v > 0.0) {
                    return Err(err(l, format!("{key} must be > 0")));
                }
                *slot = v;
            }
        }

        let mut solver = SolverOptions::default();
        if let Some(s) = t.word("gr_sign", &[("minus", GrSign::Minus), ("plus", GrSign::Plus)])? {
            solver.gr_sign = s;
        }
        if let Some(k) = t.word("kappa_q", &[("scaled", KappaQ::Scaled), ("equal", KappaQ::EqualKappa)])? {
            solver.kappa_q = k;
        }
        if let Some(a) = t.word(
            "accounting",
            &[("output-only", ClickAccounting::OutputOnly), ("complete", ClickAccounting::Complete)],
        )? {
            solver.accounting = a;
        }
        let flags = [("true", true), ("false", false)];
        if let Some(b) = t.word("bloch_siegert", &flags)? {
            solver.bloch_siegert = b;
        }
        if let Some(b) = t.word("probe", &flags)? {
            solver.probe = b;
        }

        let mut grid = GridSettings::default();
        if let Some((l, v)) = t.num("grid_nodes")? {
            if !(v >= 4.0 && v.fract() == 0.0) {
                return Err(err(l, "grid_nodes must be an integer >= 4"));
            }
            grid.nodes = v as usize;
        }
        if let Some((l, v)) = t.num("grid_span")? {
            if !(v > 0.0) {
                return Err(err(l, "grid_span must be > 0"));
            }
            grid.span = v;
        }
        let quad_tol = match t.num("quad_tol")? {
            Some((l, v)) if !(v > 0.0 && v < 1.0) => return Err(err(l, "quad_tol must lie in (0, 1)")),
            Some((_, v)) => v,
            None => 1e-10,
        };
        let out = t.take("out").map(|e| PathBuf::from(e.value));

        Ok(RunConfig { system, pulse, carrier, t_m, purcell_rate, thresholds, solver, grid, quad_tol, out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROW: &str = "\
# fast readout
omega_q_ghz = 5
omega_r_ghz = 4.09
g_mhz = 53.6
kappa_mhz = 4.08   # resonator
t_m_us = 1.0
";

    #[test]
    fn parses_minimal() {
        let c: RunConfig = ROW.parse().unwrap();
        assert!((c.pulse.t_ph - 1e-6 / 6.0).abs() < 1e-18);
        assert_eq!(c.carrier, Carrier::ResonantUp);
        assert_eq!(c.system.eta, 1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = format!("{ROW}speed = 3\n");
        match bad.parse::<RunConfig>() {
            Err(Error::Config { line, msg }) => {
                assert_eq!(line, 7);
                assert!(msg.contains("unknown key"));
            }
            other => panic!("{other:?}"),
        }
        match "omega_q_ghz 5\n".parse::<RunConfig>() {
            Err(Error::Config { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match format!("{ROW}eta = 2\n").parse::<RunConfig>() {
            Err(Error::Config { line: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_conflicting_keys() {
        assert!(format!("{ROW}g_mhz = 1\n").parse::<RunConfig>().is_err());
        assert!(format!("{ROW}t_m_ms = 1\n").parse::<RunConfig>().is_err());
    }
}
