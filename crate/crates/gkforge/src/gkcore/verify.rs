//! The verification battery: bihermitian structure, GK conditions, Poisson
//! family, Bismut connections, product structure and foliation ranks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bundle::{fmt_point, PointGeometry, StructureBundle};
use super::report::{CheckLine, CheckReport, Conventions, Tally, Tolerances};
use super::sampling::map_points;
use crate::charts::{
    bidegree_project, covariant_deriv_j, exterior_d, max_abs, nijenhuis, nijenhuis_torsion, schouten,
    Tensor,
};
use crate::error::{GkError, Result};

/// Torsion coefficient: fixed, or calibrated on the bundle being checked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KappaChoice {
    Fixed(f64),
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatteryOptions {
    pub tol: Tolerances,
    pub kappa: KappaChoice,
    /// Also run the product-structure checks (commuting bundles only).
    pub product: bool,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        BatteryOptions {
            tol: Tolerances::default(),
            kappa: KappaChoice::Fixed(0.5),
            product: false,
        }
    }
}

/// Evaluates the bundle's derived geometry at every point (in parallel).
pub fn geometries(bundle: &StructureBundle, points: &[Vec<f64>]) -> Result<Vec<PointGeometry>> {
    map_points(points, |p| bundle.geometry(p))
}

fn mat_abs(m: &DMatrix<f64>) -> f64 {
    max_abs(m)
}

/// `J±² = −I`, `J±ᵀ g J± = g`, `g = gᵀ > 0`, `ω±` antisymmetric.
pub fn structure_on(geos: &[PointGeometry], tol: &Tolerances) -> CheckReport {
    let mut t = Tally::default();
    let mut min_eig = f64::INFINITY;
    let mut worst_point = Vec::new();
    for geo in geos {
        let g = geo.g.matrix();
        let gs = g.abs().max();
        let n = g.nrows();
        for (plus, tag) in [(true, "plus"), (false, "minus")] {
            let j = geo.j(plus).matrix();
            t.add(
                &format!("structure.j_{tag}_square"),
                mat_abs(&(&j * &j + DMatrix::identity(n, n))),
                1.0,
            );
            t.add(
                &format!("structure.hermitian_{tag}"),
                mat_abs(&(j.transpose() * &g * &j - &g)),
                gs,
            );
            let w = geo.omega(plus).matrix();
            t.add(&format!("structure.omega_{tag}_antisym"), mat_abs(&(&w + w.transpose())), gs);
        }
        t.add("structure.metric_symmetric", mat_abs(&(&g - g.transpose())), gs);
        let sym = (&g + g.transpose()) * 0.5;
        let e = sym.symmetric_eigen().eigenvalues.min();
        if e < min_eig {
            min_eig = e;
            worst_point = geo.point.clone();
        }
    }
    let mut report = CheckReport::default();
    for l in t.into_lines(tol) {
        report.push(l);
    }
    if !geos.is_empty() {
        // positive ⇔ residual 0; a zero eigenvalue counts as failure
        let r = if min_eig > 0.0 { 0.0 } else { (-min_eig).max(f64::MIN_POSITIVE) };
        let mut line = CheckLine::new("structure.metric_positive", r, r, geos.len(), tol.get("structure.metric_positive"))
            .with_value(min_eig);
        if min_eig <= 0.0 {
            line = line.with_note(format!("eigenvalue {min_eig:.3e} at {}", fmt_point(&worst_point)));
        }
        report.push(line);
    }
    report
}

pub fn verify_pointwise_structure(
    bundle: &StructureBundle,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<CheckReport> {
    Ok(structure_on(&geometries(bundle, points)?, tol))
}

/// Nijenhuis tensors of `J±`.
pub fn integrability_on(geos: &[PointGeometry], tol: &Tolerances) -> Result<CheckReport> {
    let mut t = Tally::default();
    for geo in geos {
        t.add("integrability.nijenhuis_plus", nijenhuis(&geo.j_plus)?.max_abs(), 1.0);
        t.add("integrability.nijenhuis_minus", nijenhuis(&geo.j_minus)?.max_abs(), 1.0);
    }
    let mut r = CheckReport::default();
    for l in t.into_lines(tol) {
        r.push(l);
    }
    Ok(r)
}

/// `d₊ᶜω₊ + d₋ᶜω₋ = 0`, `dd±ᶜω± = 0`, agreement of the two `dᶜ` routes and
/// of a supplied `H`. Integrability is checked first and aborts on failure.
pub fn gk_on(geos: &[PointGeometry], tol: &Tolerances) -> Result<CheckReport> {
    for geo in geos {
        for (plus, what) in [(true, "J+"), (false, "J-")] {
            let n = nijenhuis(geo.j(plus))?.max_abs();
            if n > tol.get("integrability") {
                return Err(GkError::NotIntegrable {
                    what: what.into(),
                    residual: n,
                    point: geo.point.clone(),
                });
            }
        }
    }
    let rows = map_points_geo(geos, |geo| {
        let hp = geo.dc_omega(true)?;
        let hm = geo.dc_omega(false)?;
        let jp = geo.dc_omega_jets(true)?;
        let jm = geo.dc_omega_jets(false)?;
        let scale = geo.g.value().max_abs();
        let mut out = vec![
            ("gk.dc_sum", hp.add(&hm).max_abs(), scale),
            (
                "gk.dc_routes",
                jp.value().dist(&hp).max(jm.value().dist(&hm)),
                scale,
            ),
            ("gk.ddc_plus", exterior_d(&jp)?.value().max_abs(), scale),
            ("gk.ddc_minus", exterior_d(&jm)?.value().max_abs(), scale),
        ];
        if let Some(h) = &geo.h_supplied {
            out.push(("gk.h_supplied", h.value().dist(&hp), scale));
        }
        Ok(out)
    })?;
    let mut t = Tally::default();
    for row in rows {
        for (name, a, s) in row {
            t.add(name, a, s);
        }
    }
    let mut r = integrability_on(geos, tol)?;
    for l in t.into_lines(tol) {
        r.push(l);
    }
    Ok(r)
}

pub fn verify_gk_conditions(
    bundle: &StructureBundle,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<CheckReport> {
    gk_on(&geometries(bundle, points)?, tol)
}

fn map_points_geo<T: Send>(
    geos: &[PointGeometry],
    f: impl Fn(&PointGeometry) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    use rayon::prelude::*;
    geos.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

/// Real part of the `(2,0)+(0,2)` component of a real bivector w.r.t. `J`.
fn bivector_off_type(b: &Tensor, j: &DMatrix<f64>) -> Result<Tensor> {
    let jt = j.transpose();
    let p20 = bidegree_project(b, &jt, 2, 0)?;
    let p02 = bidegree_project(b, &jt, 0, 2)?;
    Ok(Tensor::from_fn(b.dim(), 2, |i| (p20.get(i) + p02.get(i)).re))
}

/// Schouten brackets of `π±`, `σ`, `σ±`, the mixed bracket
/// `[π+, π−] = c (g⁻¹)³H`, and the type decomposition of `π±`.
pub fn poisson_on(geos: &[PointGeometry], tol: &Tolerances) -> Result<CheckReport> {
    struct Row {
        lines: Vec<(&'static str, f64, f64)>,
        c: Option<f64>,
        mixed: (Tensor, Tensor),
    }
    let rows = map_points_geo(geos, |geo| {
        let pp = geo.pi(true);
        let pm = geo.pi(false);
        let s = geo.sigma();
        let sp = geo.sigma_pm(true);
        let sm = geo.sigma_pm(false);
        let mut lines = vec![
            ("poisson.pi_plus_self", schouten(&pp, &pp)?.max_abs(), 1.0),
            ("poisson.pi_minus_self", schouten(&pm, &pm)?.max_abs(), 1.0),
            ("poisson.sigma_self", schouten(&s, &s)?.max_abs(), 1.0),
            ("poisson.sigma_plus_self", schouten(&sp, &sp)?.max_abs(), 1.0),
            ("poisson.sigma_minus_self", schouten(&sm, &sm)?.max_abs(), 1.0),
            ("poisson.sigma_compat_plus", schouten(&s, &sp)?.max_abs(), 1.0),
            ("poisson.sigma_compat_minus", schouten(&s, &sm)?.max_abs(), 1.0),
        ];
        let jp = geo.j_plus.matrix();
        let jm = geo.j_minus.matrix();
        let sv = s.value();
        let js_p = Tensor::from_matrix(&(&jp * sv.to_matrix()));
        let js_m = Tensor::from_matrix(&(&jm * sv.to_matrix()));
        let scale = pp.value().max_abs();
        let (ppv, pmv) = (pp.value(), pm.value());
        lines.push((
            "poisson.type_pi_plus_wrt_plus",
            bivector_off_type(&ppv, &jp)?.dist(&js_p.scale(-0.5)),
            scale,
        ));
        lines.push((
            "poisson.type_pi_minus_wrt_plus",
            bivector_off_type(&pmv, &jp)?.dist(&js_p.scale(0.5)),
            scale,
        ));
        lines.push((
            "poisson.type_pi_plus_wrt_minus",
            bivector_off_type(&ppv, &jm)?.dist(&js_m.scale(0.5)),
            scale,
        ));
        lines.push((
            "poisson.type_pi_minus_wrt_minus",
            bivector_off_type(&pmv, &jm)?.dist(&js_m.scale(0.5)),
            scale,
        ));
        // σ − iσ+ is a (2,0) bivector for J+
        let jt = jp.transpose();
        let spv = sp.value();
        let mut bad = 0.0f64;
        for (p, q) in [(1, 1), (0, 2)] {
            let a = bidegree_project(&sv, &jt, p, q)?;
            let b = bidegree_project(&spv, &jt, p, q)?;
            let i = Complex64::i();
            for (x, y) in a.data().iter().zip(b.data()) {
                bad = bad.max((x - i * y).norm());
            }
        }
        lines.push(("poisson.sigma_holomorphic", bad, sv.max_abs()));

        let h = geo.h()?;
        let hu = geo.h_raised(&h);
        let mixed = schouten(&pp, &pm)?;
        let hh: f64 = hu.data().iter().map(|x| x * x).sum();
        let c = if hu.max_abs() > 1e-10 {
            Some(mixed.data().iter().zip(hu.data()).map(|(a, b)| a * b).sum::<f64>() / hh)
        } else {
            None
        };
        let resid = match c {
            Some(c) => mixed.dist(&hu.scale(c)),
            None => mixed.max_abs(),
        };
        lines.push(("poisson.mixed_proportional", resid, hu.max_abs()));
        Ok(Row {
            lines,
            c,
            mixed: (mixed, hu),
        })
    })?;
    let mut t = Tally::default();
    let mut cs = Vec::new();
    for row in &rows {
        for (name, a, s) in &row.lines {
            t.add(name, *a, *s);
        }
        cs.extend(row.c);
    }
    let mut r = CheckReport::default();
    for l in t.into_lines(tol) {
        r.push(l);
    }
    let spread_tol = tol.get("poisson.mixed_spread");
    if cs.is_empty() {
        let worst = rows.iter().map(|r| r.mixed.0.max_abs()).fold(0.0, f64::max);
        r.push(
            CheckLine::new("poisson.mixed_spread", 0.0, 0.0, rows.len(), spread_tol)
                .with_note(format!("H vanishes; [pi+,pi-] max {worst:.3e}")),
        );
    } else {
        let mean = cs.iter().sum::<f64>() / cs.len() as f64;
        let var = cs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / cs.len() as f64;
        let spread = var.sqrt() / mean.abs();
        r.push(CheckLine::new("poisson.mixed_spread", spread, spread, cs.len(), spread_tol).with_value(mean));
        r.conventions.schouten_c = Some(mean);
    }
    Ok(r)
}

pub fn verify_poisson_family(
    bundle: &StructureBundle,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<CheckReport> {
    poisson_on(&geometries(bundle, points)?, tol)
}

/// `‖∇±J±‖` with `∇± = ∇ ± κ g⁻¹H`.
pub fn bismut_on(geos: &[PointGeometry], kappa: f64, tol: &Tolerances) -> Result<CheckReport> {
    let rows = map_points_geo(geos, |geo| {
        let h = geo.h()?;
        let p = covariant_deriv_j(&geo.g, &h, &geo.j_plus, 1.0, kappa)?.max_abs();
        let m = covariant_deriv_j(&geo.g, &h, &geo.j_minus, -1.0, kappa)?.max_abs();
        Ok((p, m))
    })?;
    let mut t = Tally::default();
    for (p, m) in rows {
        t.add("bismut.plus", p, 1.0);
        t.add("bismut.minus", m, 1.0);
    }
    let mut r = CheckReport::new(Conventions::with_kappa(kappa, "fixed"));
    for l in t.into_lines(tol) {
        r.push(l);
    }
    Ok(r)
}

pub fn verify_bismut(
    bundle: &StructureBundle,
    points: &[Vec<f64>],
    kappa: f64,
    tol: &Tolerances,
) -> Result<CheckReport> {
    bismut_on(&geometries(bundle, points)?, kappa, tol)
}

/// Outcome of running the Bismut check for each candidate `κ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub kappa: f64,
    /// `(κ, max ‖∇±J±‖)` for every candidate.
    pub candidates: Vec<(f64, f64)>,
}

pub const KAPPA_CANDIDATES: [f64; 2] = [0.5, 1.0];

pub fn calibrate_on(geos: &[PointGeometry]) -> Result<Calibration> {
    let tol = Tolerances::default();
    let mut candidates = Vec::new();
    for k in KAPPA_CANDIDATES {
        let r = bismut_on(geos, k, &tol)?;
        candidates.push((k, r.max_abs("bismut")));
    }
    let best = candidates
        .iter()
        .fold((f64::NAN, f64::INFINITY), |b, c| if c.1 < b.1 { *c } else { b });
    Ok(Calibration {
        kappa: best.0,
        candidates,
    })
}

pub fn calibrate_kappa(bundle: &StructureBundle, points: &[Vec<f64>]) -> Result<Calibration> {
    calibrate_on(&geometries(bundle, points)?)
}

/// `Π² = I` and `N(Π) = 0`; requires `[J+, J−] = 0`.
pub fn product_on(geos: &[PointGeometry], tol: &Tolerances) -> Result<CheckReport> {
    for geo in geos {
        let c = geo.commutator().value().max_abs();
        if c > 1e-8 {
            return Err(GkError::Precondition(format!(
                "product structure needs commuting J±; ‖[J+,J−]‖ = {c:.3e} at {}",
                fmt_point(&geo.point)
            )));
        }
    }
    let mut t = Tally::default();
    for geo in geos {
        let pi = geo.product();
        let m = pi.matrix();
        let n = m.nrows();
        t.add("product.square", mat_abs(&(&m * &m - DMatrix::identity(n, n))), 1.0);
        t.add("product.nijenhuis", nijenhuis_torsion(&pi)?.max_abs(), 1.0);
    }
    let mut r = CheckReport::default();
    for l in t.into_lines(tol) {
        r.push(l);
    }
    Ok(r)
}

pub fn verify_product_structure(
    bundle: &StructureBundle,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<CheckReport> {
    product_on(&geometries(bundle, points)?, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationRow {
    pub point: Vec<f64>,
    pub rank_pi_plus: usize,
    pub rank_pi_minus: usize,
    pub rank_sigma: usize,
    /// Largest `‖(I − P)σ‖` over the projectors onto `im π+` and `im π−`.
    pub containment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationReport {
    pub rows: Vec<FoliationRow>,
    pub rank_jumps: bool,
}

/// Singular values below `1e-8·s_max` (and below `1e-12` absolutely) count as zero.
pub fn numerical_rank(m: &DMatrix<f64>) -> (usize, DMatrix<f64>) {
    let svd = m.clone().svd(true, false);
    let smax = svd.singular_values.max();
    let thresh = (1e-8 * smax).max(1e-12);
    let u = svd.u.expect("requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > thresh)
        .collect();
    let n = m.nrows();
    let mut proj = DMatrix::zeros(n, n);
    for &i in &keep {
        let c = u.column(i);
        proj += c * c.transpose();
    }
    (keep.len(), proj)
}

pub fn foliation_on(geos: &[PointGeometry]) -> FoliationReport {
    let rows: Vec<FoliationRow> = geos
        .iter()
        .map(|geo| {
            let pp = geo.pi(true).matrix();
            let pm = geo.pi(false).matrix();
            let s = geo.sigma().matrix();
            let (rp, prp) = numerical_rank(&pp);
            let (rm, prm) = numerical_rank(&pm);
            let (rs, _) = numerical_rank(&s);
            let n = s.nrows();
            let id = DMatrix::<f64>::identity(n, n);
            let c = mat_abs(&((&id - prp) * &s)).max(mat_abs(&((&id - prm) * &s)));
            FoliationRow {
                point: geo.point.clone(),
                rank_pi_plus: rp,
                rank_pi_minus: rm,
                rank_sigma: rs,
                containment: c,
            }
        })
        .collect();
    let rank_jumps = rows.windows(2).any(|w| {
        (w[0].rank_pi_plus, w[0].rank_pi_minus, w[0].rank_sigma)
            != (w[1].rank_pi_plus, w[1].rank_pi_minus, w[1].rank_sigma)
    });
    FoliationReport { rows, rank_jumps }
}

pub fn foliation_report(bundle: &StructureBundle, points: &[Vec<f64>]) -> Result<FoliationReport> {
    Ok(foliation_on(&geometries(bundle, points)?))
}

/// Full battery. Later stages are skipped when the structure checks fail.
pub fn run_battery(
    bundle: &StructureBundle,
    points: &[Vec<f64>],
    opts: &BatteryOptions,
) -> Result<CheckReport> {
    let geos = geometries(bundle, points)?;
    let (kappa, source) = match opts.kappa {
        KappaChoice::Fixed(k) => (k, "fixed"),
        KappaChoice::Auto => (calibrate_on(&geos)?.kappa, "calibrated"),
    };
    let mut report = CheckReport::new(Conventions::with_kappa(kappa, source));
    report.merge(structure_on(&geos, &opts.tol));
    if !report.passed() {
        return Ok(report);
    }
    report.merge(gk_on(&geos, &opts.tol)?);
    report.merge(poisson_on(&geos, &opts.tol)?);
    report.merge(bismut_on(&geos, kappa, &opts.tol)?);
    if opts.product {
        report.merge(product_on(&geos, &opts.tol)?);
    }
    let fol = foliation_on(&geos);
    let worst = fol.rows.iter().map(|r| r.containment).fold(0.0, f64::max);
    let mut line = CheckLine::new(
        "poisson.leaf_containment",
        worst,
        worst,
        fol.rows.len(),
        opts.tol.get("poisson.leaf_containment"),
    );
    if fol.rank_jumps {
        line = line.with_note("rank jumps between sample points");
    }
    report.push(line);
    Ok(report)
}
