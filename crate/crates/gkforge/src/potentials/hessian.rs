//! Kähler and commuting constructions: `ω± = i(∂z∂̄z ∓ ∂z′∂̄z′)K`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::cforms::real_form;
use super::scenario::{Case, ExprPotential, Potential, PotentialScenario};
use super::Built;
use crate::charts::{standard_structure, Chart, JetTensor, Role};
use crate::error::{GkError, Result};
use crate::expr::{wirtinger_chain, CJet, ExprAst, JetSpace, Slot};
use crate::gkcore::{map_points, CheckLine, CheckReport, FieldSource, PointFields, StructureBundle};

/// Fields from a weighted sum of potentials, each turned into forms separately.
#[derive(Debug)]
pub(crate) struct HessianSource {
    pub chart: Arc<Chart>,
    pub terms: Vec<(f64, Arc<dyn Potential>)>,
    pub with_h: bool,
}

fn slots(chart: &Chart, role: Role) -> Vec<usize> {
    chart.block(role)
}

impl HessianSource {
    fn forms(&self, point: &[f64]) -> Result<(JetTensor, JetTensor, Option<JetTensor>)> {
        let chart = &self.chart;
        let n = chart.real_dim();
        let space = JetSpace::new(n, 4)?;
        let pairs = chart.pairs();
        let z = slots(chart, Role::Z);
        let zp = slots(chart, Role::ZPrime);
        let i = Complex64::i();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        let mut h = Vec::new();
        for (w, pot) in &self.terms {
            let k = CJet::real(pot.jet(&space, point, 4)?);
            let d = |s: &[Slot]| wirtinger_chain(&k, &pairs, s);
            for (block, sp) in [(&z, 1.0), (&zp, -1.0)] {
                for &a in block.iter() {
                    for &b in block.iter() {
                        let c = d(&[Slot::holo(a), Slot::anti(b)])?;
                        let u = vec![chart.dw(a, false), chart.dw(b, true)];
                        plus.push((c.scale(i * (*w * sp)), u.clone()));
                        minus.push((c.scale(i * *w), u));
                    }
                }
            }
            if self.with_h {
                // (∂z ∂̄z̄′ ∂̄z̄ + ∂z′ ∂z ∂̄z̄ + ∂̄z̄ ∂z′ ∂̄z̄′ + ∂z′ ∂z ∂̄z̄′) K
                let pattern: [[(Role, bool); 3]; 4] = [
                    [(Role::Z, false), (Role::ZPrime, true), (Role::Z, true)],
                    [(Role::ZPrime, false), (Role::Z, false), (Role::Z, true)],
                    [(Role::Z, true), (Role::ZPrime, false), (Role::ZPrime, true)],
                    [(Role::ZPrime, false), (Role::Z, false), (Role::ZPrime, true)],
                ];
                for pat in pattern {
                    let b0 = slots(chart, pat[0].0);
                    let b1 = slots(chart, pat[1].0);
                    let b2 = slots(chart, pat[2].0);
                    for &a in &b0 {
                        for &b in &b1 {
                            for &c in &b2 {
                                let s = [
                                    Slot { pair: a, conj: pat[0].1 },
                                    Slot { pair: b, conj: pat[1].1 },
                                    Slot { pair: c, conj: pat[2].1 },
                                ];
                                let coeff = d(&s)?.scale(Complex64::new(*w, 0.0));
                                let u = vec![
                                    chart.dw(a, pat[0].1),
                                    chart.dw(b, pat[1].1),
                                    chart.dw(c, pat[2].1),
                                ];
                                h.push((coeff, u));
                            }
                        }
                    }
                }
            }
        }
        let wp = real_form(&space, 2, n, &plus);
        let wm = real_form(&space, 2, n, &minus);
        let h = self.with_h.then(|| real_form(&space, 1, n, &h));
        Ok((wp, wm, h))
    }
}

impl FieldSource for HessianSource {
    fn fields(&self, point: &[f64]) -> Result<PointFields> {
        let (wp, wm, h) = self.forms(point)?;
        let space = wp.space().clone();
        let jp = JetTensor::from_matrix(&space, 2, &standard_structure(&self.chart.plus_signs()));
        let jm = JetTensor::from_matrix(&space, 2, &standard_structure(&self.chart.minus_signs()));
        let g = wp.matmul(&jp);
        let mut extras = BTreeMap::new();
        extras.insert("g_minus".to_string(), wm.matmul(&jm).value());
        Ok(PointFields {
            j_plus: jp,
            j_minus: jm,
            g,
            h,
            extras,
        })
    }
}

/// `ω±` of the commuting formula (ω+ = ω− = ω for a Kähler chart) at a point.
pub fn hessian_forms(chart: &Arc<Chart>, k: &ExprAst, point: &[f64]) -> Result<(nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>)> {
    let source = HessianSource {
        chart: chart.clone(),
        terms: vec![(1.0, Arc::new(ExprPotential(Arc::new(k.clone()))))],
        with_h: false,
    };
    let (wp, wm, _) = source.forms(point)?;
    Ok((wp.matrix(), wm.matrix()))
}

/// Smallest eigenvalue of the symmetrized metric.
pub(crate) fn min_eigen(g: &nalgebra::DMatrix<f64>) -> f64 {
    ((g + g.transpose()) * 0.5).symmetric_eigen().eigenvalues.min()
}

fn bundle_has_h(s: &PotentialScenario) -> bool {
    s.case == Case::Commuting
}

/// Positivity and dual-`g` validation shared by the Hessian builders.
pub(crate) fn validate_hessian(bundle: &StructureBundle, scenario: &PotentialScenario) -> Result<CheckReport> {
    let points = scenario.points();
    let rows = map_points(&points, |p| {
        let f = bundle.fields(p)?;
        let g = f.g.matrix();
        let e = min_eigen(&g);
        if !(e > 0.0) {
            return Err(GkError::Positivity {
                point: p.to_vec(),
                eigenvalue: e,
            });
        }
        let dual = f.extras["g_minus"].to_matrix();
        let scale = g.abs().max().max(1.0);
        let r = (&g - &dual).abs().max() / scale;
        if r > 1e-10 {
            return Err(GkError::Convention {
                what: "g = ω+J+ vs g = ω−J−".into(),
                residual: r,
            });
        }
        let mut hr = 0.0;
        if let Some(h) = &f.h {
            let dc = bundle.geometry(p)?.h()?;
            let hv = h.value();
            hr = hv.dist(&dc) / hv.max_abs().max(1.0);
            if hr > 1e-10 {
                return Err(GkError::Convention {
                    what: "H formula vs d₊ᶜω₊".into(),
                    residual: hr,
                });
            }
        }
        Ok((r, hr))
    })?;
    let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_h = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut report = CheckReport::default();
    report.push(CheckLine::new(
        "build.g_dual",
        worst,
        worst,
        points.len(),
        scenario.tol.get("build.g_dual"),
    ));
    if bundle_has_h(scenario) {
        report.push(CheckLine::new(
            "build.h_formula",
            worst_h,
            worst_h,
            points.len(),
            scenario.tol.get("gk.h_formula"),
        ));
    }
    Ok(report)
}

pub(crate) fn build_hessian(scenario: &PotentialScenario, case: Case) -> Result<Built> {
    if scenario.case != case {
        return Err(GkError::Precondition(format!(
            "scenario `{}` is tagged `{}`, not `{case}`",
            scenario.name, scenario.case
        )));
    }
    scenario.validate_blocks()?;
    scenario.validate_real()?;
    let mut terms: Vec<(f64, Arc<dyn Potential>)> = vec![(1.0, scenario.potential.clone())];
    if let Some(d) = &scenario.deformation {
        terms.push((d.t, Arc::new(super::scenario::ExprPotential(d.phi.clone()))));
    }
    let source = HessianSource {
        chart: scenario.chart.clone(),
        terms,
        with_h: case == Case::Commuting,
    };
    let bundle = StructureBundle::new(&scenario.name, scenario.chart.clone(), Arc::new(source));
    let report = validate_hessian(&bundle, scenario)?;
    Ok(Built { bundle, report })
}

/// `ω = i∂∂̄K`, `J+ = J−` standard, `g = ωJ`.
pub fn build_kahler(scenario: &PotentialScenario) -> Result<Built> {
    build_hessian(scenario, Case::Kahler)
}

/// `ω± = i(∂z∂̄z ∓ ∂z′∂̄z′)K` with `J+ = i` on both blocks and `J− = −i` on z′.
///
/// `H` is also assembled from third derivatives of `K` and supplied to the
/// bundle, so the battery compares it with `d₊ᶜω₊`.
pub fn build_commuting(scenario: &PotentialScenario) -> Result<Built> {
    build_hessian(scenario, Case::Commuting)
}
