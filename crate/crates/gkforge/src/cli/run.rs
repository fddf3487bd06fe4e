//! Check runner, calibration and report rendering.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::load::{Loaded, LoadedScenario};
use super::schema::SCHEMA_VERSION;
use crate::error::{GkError, Result};
use crate::gerbe::check_cover;
use crate::gkcore::{
    calibrate_on, geometries, poisson_on, run_battery, BatteryOptions, CheckLine, CheckReport, KappaChoice,
};
use crate::potentials::{
    build_commuting, build_general, build_kahler, build_symplectic, deform, legendre_transform, Built, Case,
    PotentialScenario,
};

/// Outcome for one scenario or cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub name: String,
    /// `scenario` or `cover`.
    pub kind: String,
    /// Case tag of a scenario, cover kind of a cover.
    pub case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub results: Vec<ItemResult>,
    pub pass: bool,
}

impl RunReport {
    /// 0 when everything passed, 1 when a check failed, 2 when an item could
    /// not be built.
    pub fn exit_code(&self) -> i32 {
        if self.results.iter().any(|r| r.error.is_some()) {
            2
        } else if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Checks sorted by name, residuals to three significant digits.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let status = match (&r.error, r.pass) {
                (Some(_), _) => "ERROR",
                (None, true) => "PASS",
                (None, false) => "FAIL",
            };
            let seed = r.seed.map(|s| format!(", seed {s}")).unwrap_or_default();
            let _ = writeln!(out, "{} `{}` [{}{seed}]: {status}", r.kind, r.name, r.case);
            if let Some(e) = &r.error {
                let _ = writeln!(out, "  error: {e}");
            }
            if let Some(rep) = &r.report {
                if r.kind == "scenario" {
                    let c = &rep.conventions;
                    let _ = write!(out, "  kappa {} ({})", c.kappa, c.kappa_source);
                    if let Some(sc) = c.schouten_c {
                        let _ = write!(out, ", schouten c {sc:.2e}");
                    }
                    let _ = writeln!(out);
                }
                let width = rep.lines.iter().map(|l| l.name.len()).max().unwrap_or(0);
                for l in &rep.lines {
                    let _ = write!(
                        out,
                        "  {} {:width$}  {:.2e}  rel {:.2e}  tol {:.2e}  n={}",
                        if l.pass { "ok  " } else { "FAIL" },
                        l.name,
                        l.max_abs,
                        l.max_rel,
                        l.tol,
                        l.samples
                    );
                    if let Some(v) = l.value {
                        let _ = write!(out, "  value {v:.6}");
                    }
                    if let Some(n) = &l.note {
                        let _ = write!(out, "  ({n})");
                    }
                    let _ = writeln!(out);
                }
            }
        }
        let failed = self.results.iter().filter(|r| !r.pass && r.error.is_none()).count();
        let errors = self.results.iter().filter(|r| r.error.is_some()).count();
        let _ = writeln!(
            out,
            "overall: {} ({} items, {failed} failed, {errors} errors)",
            if self.pass { "PASS" } else { "FAIL" },
            self.results.len()
        );
        out
    }
}

fn build(s: &PotentialScenario) -> Result<Built> {
    match s.case {
        Case::Kahler => build_kahler(s),
        Case::Commuting => build_commuting(s),
        Case::Symplectic => build_symplectic(s),
        Case::General => build_general(s),
    }
}

/// The scenario after its Legendre swap, plus its bundle (deformed if asked).
fn prepare(ls: &LoadedScenario) -> Result<(PotentialScenario, Built, Vec<CheckLine>)> {
    let mut s = ls.scenario.clone();
    if !ls.legendre.is_empty() {
        s = legendre_transform(&s, &ls.legendre)?;
    }
    let mut extra = Vec::new();
    let built = match &ls.deformation {
        None => build(&s)?,
        Some(d) => {
            let out = deform(&s, &d.phi, d.t)?;
            for (name, v) in [("deform.radius_plus", out.radius.positive), ("deform.radius_minus", out.radius.negative)] {
                extra.push(
                    CheckLine::new(name, 0.0, 0.0, s.samples, 0.0)
                        .with_value(v)
                        .with_note(format!("bisection to 1e-3, cap {}", out.radius.cap)),
                );
            }
            out.built
        }
    };
    Ok((s, built, extra))
}

fn run_scenario(ls: &LoadedScenario, kappa: KappaChoice) -> Result<CheckReport> {
    let (s, built, extra) = prepare(ls)?;
    let opts = BatteryOptions {
        tol: s.tol.clone(),
        kappa,
        product: s.case == Case::Commuting,
    };
    let mut report = run_battery(&built.bundle, &s.points(), &opts)?;
    report.merge(built.report);
    for l in extra {
        report.push(l);
    }
    Ok(report)
}

fn item(name: &str, kind: &str, case: String, seed: Option<u64>, r: Result<CheckReport>) -> ItemResult {
    match r {
        Ok(report) => ItemResult {
            name: name.to_string(),
            kind: kind.to_string(),
            case,
            seed,
            pass: report.passed(),
            report: Some(report),
            error: None,
        },
        Err(e) => ItemResult {
            name: name.to_string(),
            kind: kind.to_string(),
            case,
            seed,
            pass: false,
            report: None,
            error: Some(e.to_string()),
        },
    }
}

/// Runs every scenario and cover; items run concurrently and are reported
/// in file order.
pub fn run(loaded: &Loaded) -> RunReport {
    let mut results: Vec<ItemResult> = loaded
        .scenarios
        .par_iter()
        .map(|ls| {
            let s = &ls.scenario;
            item(&s.name, "scenario", s.case.to_string(), Some(s.seed), run_scenario(ls, loaded.kappa))
        })
        .collect();
    results.extend(loaded.covers.par_iter().map(|c| {
        let kind = serde_json::to_value(c.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        item(&c.name, "cover", kind, None, check_cover(c))
    }).collect::<Vec<_>>());
    let pass = results.iter().all(|r| r.pass);
    RunReport {
        schema_version: SCHEMA_VERSION,
        results,
        pass,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub scenario: String,
    pub kappa: f64,
    /// `(κ, max ‖∇±J±‖)` per candidate.
    pub candidates: Vec<(f64, f64)>,
    pub schouten_c: Option<f64>,
}

/// Fits `κ` and the Schouten constant on every scenario.
pub fn calibrate(loaded: &Loaded) -> Result<Vec<CalibrationRow>> {
    loaded
        .scenarios
        .par_iter()
        .map(|ls| {
            let (s, built, _) = prepare(ls).map_err(|e| e.context(format!("scenario `{}`", ls.scenario.name)))?;
            let geos = geometries(&built.bundle, &s.points())?;
            let cal = calibrate_on(&geos)?;
            let schouten_c = poisson_on(&geos, &s.tol)?.conventions.schouten_c;
            Ok(CalibrationRow {
                scenario: s.name.clone(),
                kappa: cal.kappa,
                candidates: cal.candidates,
                schouten_c,
            })
        })
        .collect()
}

pub fn render_calibration(rows: &[CalibrationRow]) -> String {
    let mut out = String::new();
    let conv = crate::gkcore::Conventions::default();
    let _ = writeln!(out, "conventions: {}; {}", conv.omega, conv.g_extraction);
    for r in rows {
        let _ = writeln!(out, "scenario `{}`: kappa = {}", r.scenario, r.kappa);
        for (k, res) in &r.candidates {
            let _ = writeln!(out, "  kappa {k}: max |nabla J| {res:.2e}");
        }
        match r.schouten_c {
            Some(c) => {
                let _ = writeln!(out, "  schouten constant {c:.6e}");
            }
            None => {
                let _ = writeln!(out, "  schouten constant: not fitted (pi+ or pi- vanishes)");
            }
        }
    }
    out
}

/// Runs `f` on a pool capped by `GKFORGE_THREADS` when it is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var("GKFORGE_THREADS") {
        Err(_) => Ok(f()),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| GkError::Precondition(format!("GKFORGE_THREADS must be a positive integer, got `{v}`")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| GkError::Precondition(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
