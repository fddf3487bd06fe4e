//! General construction: `J±` by pushforward through the two polarizations,
//! `ω± = A± + J±·A±` with `A± = d Re λ±`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::cforms::one_form;
use super::hessian::min_eigen;
use super::polar::{leaf_pairs, pushforward, Side};
use super::scenario::{Case, Potential, PotentialScenario};
use super::Built;
use crate::charts::{condition_number, dc_jets, exterior_d, Chart, JetTensor, Role};
use crate::error::{GkError, Result};
use crate::expr::{wirtinger_chain, CJet, JetSpace, Slot};
use crate::gkcore::report::Tally;
use crate::gkcore::{map_points, CheckReport, FieldSource, PointFields, StructureBundle};

/// Residuals past this abort the build whatever the check tolerance; below it
/// they are only reported.
const GUARD: f64 = 1e-8;

/// Everything the general construction produces at one point.
pub(crate) struct GeneralJets {
    pub j_plus: JetTensor,
    pub j_minus: JetTensor,
    pub re_lambda_plus: JetTensor,
    pub re_lambda_minus: JetTensor,
    pub a_plus: JetTensor,
    pub a_minus: JetTensor,
    pub omega_plus: JetTensor,
    pub omega_minus: JetTensor,
}

/// `Re λ = −½ Im Σ K_s dw_s` over the given `(coordinate, conjugate)` slots.
fn re_lambda(chart: &Chart, k: &CJet, slots: &[(usize, bool)]) -> Result<JetTensor> {
    let pairs = chart.pairs();
    let space = k.re.space().clone();
    let mut terms = Vec::new();
    for &(c, conj) in slots {
        let s = Slot { pair: c, conj };
        let kc = wirtinger_chain(k, &pairs, &[s])?.scale(Complex64::new(-0.5, 0.0));
        terms.push((kc, chart.dw(c, conj)));
    }
    Ok(one_form(&space, k.order() - 1, chart.real_dim(), &terms, true))
}

pub(crate) fn general_jets(chart: &Chart, k: &CJet, point: &[f64]) -> Result<GeneralJets> {
    let jp = pushforward(chart, k, Side::Plus, &chart.plus_signs(), point, false)?;
    let jm = pushforward(chart, k, Side::Minus, &chart.minus_signs(), point, false)?;
    let z = chart.block(Role::Z);
    let zp = chart.block(Role::ZPrime);
    let lp = leaf_pairs(chart);
    let mut sp: Vec<(usize, bool)> = lp.iter().map(|&(_, p)| (p, true)).collect();
    sp.extend(z.iter().map(|&c| (c, true)));
    sp.extend(zp.iter().map(|&c| (c, false)));
    let mut sm: Vec<(usize, bool)> = lp.iter().map(|&(q, _)| (q, true)).collect();
    sm.extend(z.iter().map(|&c| (c, true)));
    sm.extend(zp.iter().map(|&c| (c, true)));
    let rp = re_lambda(chart, k, &sp)?;
    let rm = re_lambda(chart, k, &sm)?;
    let ap = exterior_d(&rp)?.truncate(2);
    let am = exterior_d(&rm)?.truncate(2);
    let wp = ap.add(&ap.pull_slots(&jp));
    let wm = am.add(&am.pull_slots(&jm));
    Ok(GeneralJets {
        j_plus: jp,
        j_minus: jm,
        re_lambda_plus: rp,
        re_lambda_minus: rm,
        a_plus: ap,
        a_minus: am,
        omega_plus: wp,
        omega_minus: wm,
    })
}

#[derive(Debug)]
pub(crate) struct GeneralSource {
    pub chart: Arc<Chart>,
    pub potential: Arc<dyn Potential>,
}

impl GeneralSource {
    fn jets(&self, point: &[f64]) -> Result<GeneralJets> {
        let space = JetSpace::new(self.chart.real_dim(), 4)?;
        let k = CJet::real(self.potential.jet(&space, point, 4)?);
        general_jets(&self.chart, &k, point)
    }
}

impl FieldSource for GeneralSource {
    fn fields(&self, point: &[f64]) -> Result<PointFields> {
        let gj = self.jets(point)?;
        let g = gj.omega_plus.matmul(&gj.j_plus);
        let mut extras = BTreeMap::new();
        extras.insert("g_minus".to_string(), gj.omega_minus.matmul(&gj.j_minus).value());
        extras.insert("A_plus".to_string(), gj.a_plus.value());
        extras.insert("A_minus".to_string(), gj.a_minus.value());
        Ok(PointFields {
            j_plus: gj.j_plus,
            j_minus: gj.j_minus,
            g,
            h: None,
            extras,
        })
    }
}

/// `ω` through the literal route `d Re λ + dᶜ(Im λ)`, `Im λ = −J·Re λ`.
fn literal_omega(re_lambda: &JetTensor, j: &JetTensor) -> Result<JetTensor> {
    let im = re_lambda.truncate(2).pull_slots(j).scale(-1.0);
    Ok(exterior_d(re_lambda)?.truncate(1).add(&dc_jets(&im, j)?))
}

fn validate(source: &GeneralSource, scenario: &PotentialScenario) -> Result<CheckReport> {
    let points = scenario.points();
    let rows = map_points(&points, |p| {
        let gj = source.jets(p)?;
        let wp = gj.omega_plus.value();
        let wm = gj.omega_minus.value();
        let g = gj.omega_plus.matmul(&gj.j_plus).matrix();
        let gm = gj.omega_minus.matmul(&gj.j_minus).matrix();
        let e = min_eigen(&g);
        if !(e > 0.0) {
            return Err(GkError::Positivity {
                point: p.to_vec(),
                eigenvalue: e,
            });
        }
        for (name, a) in [("A+", &gj.a_plus), ("A-", &gj.a_minus)] {
            let c = condition_number(&a.matrix());
            if !(c < 1e12) {
                return Err(GkError::InvalidPotential {
                    reason: format!("{name} = d Re λ is degenerate (condition number {c:.3e})"),
                });
            }
        }
        let gscale = g.abs().max();
        let dual = (&g - &gm).abs().max();
        let compat = dc_jets(&gj.a_plus, &gj.j_plus)?
            .value()
            .add(&dc_jets(&gj.a_minus, &gj.j_minus)?.value())
            .max_abs();
        let lit = literal_omega(&gj.re_lambda_plus, &gj.j_plus)?
            .value()
            .dist(&wp)
            .max(literal_omega(&gj.re_lambda_minus, &gj.j_minus)?.value().dist(&wm));
        let ascale = gj.a_plus.value().max_abs().max(gj.a_minus.value().max_abs());
        if dual / gscale.max(1.0) > scenario.tol.get("build.g_dual").max(GUARD) {
            return Err(GkError::Convention {
                what: "g = ω+J+ vs g = ω−J−".into(),
                residual: dual,
            });
        }
        if compat / ascale.max(1.0) > scenario.tol.get("build.compat").max(GUARD) {
            return Err(GkError::InvalidPotential {
                reason: format!("d₊ᶜ d Re λ+ + d₋ᶜ d Re λ− = {compat:.3e} at {p:?}"),
            });
        }
        Ok((dual, gscale, compat, ascale, lit, wp.max_abs().max(wm.max_abs())))
    })?;
    let mut t = Tally::default();
    for (dual, gs, compat, asc, lit, ws) in rows {
        t.add("build.g_dual", dual, gs);
        t.add("build.compat", compat, asc);
        t.add("build.literal_route", lit, ws);
    }
    let mut report = CheckReport::default();
    for l in t.into_lines(&scenario.tol) {
        report.push(l);
    }
    Ok(report)
}

/// General-type construction. With an empty leaf block this reduces to
/// the commuting construction; with empty z/z′ blocks, to the symplectic one.
pub fn build_general(scenario: &PotentialScenario) -> Result<Built> {
    if scenario.case != Case::General {
        return Err(GkError::Precondition(format!(
            "scenario `{}` is tagged `{}`, not `general`",
            scenario.name, scenario.case
        )));
    }
    scenario.validate_blocks()?;
    scenario.validate_real()?;
    let source = GeneralSource {
        chart: scenario.chart.clone(),
        potential: super::effective_potential(scenario),
    };
    let report = validate(&source, scenario)?;
    let bundle = StructureBundle::new(&scenario.name, scenario.chart.clone(), Arc::new(source));
    Ok(Built { bundle, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::Coord;

    #[test]
    fn flat_commuting_metric_is_twice_identity() {
        let chart = Chart::new("c", vec![Coord::new("z", Role::Z), Coord::new("w", Role::ZPrime)]).unwrap();
        let s = PotentialScenario::parse("flat", chart, Case::General, "abs2(z) - abs2(w)")
            .unwrap()
            .with_sampling(0.5, 4, 3);
        let b = build_general(&s).unwrap();
        assert!(b.report.passed(), "{:?}", b.report);
        let g = b.bundle.fields(&[0.1, 0.2, -0.3, 0.05]).unwrap().g.matrix();
        let diff = g - nalgebra::DMatrix::<f64>::identity(4, 4) * 2.0;
        assert!(diff.abs().max() < 1e-14, "{diff}");
    }

    fn max_g_diff(a: &Built, b: &Built, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .map(|p| {
                let ga = a.bundle.fields(p).unwrap().g.matrix();
                let gb = b.bundle.fields(p).unwrap().g.matrix();
                (ga - gb).abs().max()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn degenerates_to_commuting_and_symplectic() {
        let c = Chart::new("c", vec![Coord::new("z", Role::Z), Coord::new("w", Role::ZPrime)]).unwrap();
        let k = "abs2(z) - abs2(w) + 0.1*re(z*w)*im(z*conj(w)) + 0.05*re(z*z*conj(z)*w)";
        let sg = PotentialScenario::parse("g", c.clone(), Case::General, k).unwrap().with_sampling(0.4, 6, 2);
        let sc = PotentialScenario::parse("c", c, Case::Commuting, k).unwrap().with_sampling(0.4, 6, 2);
        let d = max_g_diff(&build_general(&sg).unwrap(), &super::super::build_commuting(&sc).unwrap(), &sg.points());
        assert!(d < 1e-12, "{d}");

        let l = Chart::new("l", vec![Coord::new("q", Role::LeafQ), Coord::new("P", Role::LeafP)]).unwrap();
        let k = "2*re(q*P) + 0.5*(abs2(q) + abs2(P)) + 0.05*re(q*q*conj(P))";
        let sg = PotentialScenario::parse("g", l.clone(), Case::General, k).unwrap().with_sampling(0.3, 6, 2);
        let ss = PotentialScenario::parse("s", l, Case::Symplectic, k).unwrap().with_sampling(0.3, 6, 2);
        let d = max_g_diff(&build_general(&sg).unwrap(), &super::super::build_symplectic(&ss).unwrap(), &sg.points());
        assert!(d < 1e-12, "{d}");
    }
}
