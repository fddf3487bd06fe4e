//! Symplectic-type construction from a generating function `K(q, P)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::cforms::real_form;
use super::hessian::min_eigen;
use super::polar::{leaf_pairs, pushforward, Side};
use super::scenario::{Case, Potential, PotentialScenario};
use super::Built;
use crate::charts::{condition_number, exterior_d, square_residual, Chart, JetTensor};
use crate::error::{GkError, Result};
use crate::expr::{wirtinger_chain, CJet, JetSpace, Slot};
use crate::gkcore::{map_points, CheckReport, FieldSource, PointFields, StructureBundle};
use crate::gkcore::report::Tally;

/// `Ω`, `Ω+`, `Ω−` as order-2 jets.
pub(crate) struct SymplecticForms {
    pub omega: JetTensor,
    pub omega_plus: JetTensor,
    pub omega_minus: JetTensor,
}

/// Assembles the three forms from second derivatives of `K` (order ≥ 3).
pub(crate) fn symplectic_forms(chart: &Chart, k: &CJet) -> Result<SymplecticForms> {
    let n = chart.real_dim();
    let space = k.re.space().clone();
    let pairs = chart.pairs();
    let lp = leaf_pairs(chart);
    let d = |s: &[Slot]| wirtinger_chain(k, &pairs, s);
    let half = Complex64::new(0.5, 0.0);
    // -½ Im(c w) = Re(½ i c w)
    let him = Complex64::new(0.0, 0.5);
    let (mut om, mut op, mut omm) = (Vec::new(), Vec::new(), Vec::new());
    for &(qa, pa) in &lp {
        for &(qb, pb) in &lp {
            let dq = |c, conj| chart.dw(c, conj);
            om.push((d(&[Slot::holo(qa), Slot::holo(pb)])?.scale(half), vec![dq(qa, false), dq(pb, false)]));
            om.push((d(&[Slot::holo(qa), Slot::anti(pb)])?.scale(half), vec![dq(qa, false), dq(pb, true)]));

            op.push((d(&[Slot::holo(qa), Slot::anti(qb)])?.scale(him), vec![dq(qb, true), dq(qa, false)]));
            op.push((d(&[Slot::anti(qa), Slot::anti(pb)])?.scale(him), vec![dq(qa, true), dq(pb, true)]));
            op.push((d(&[Slot::anti(qa), Slot::holo(pb)])?.scale(him), vec![dq(qa, true), dq(pb, false)]));

            omm.push((d(&[Slot::holo(pa), Slot::anti(pb)])?.scale(him), vec![dq(pa, false), dq(pb, true)]));
            omm.push((d(&[Slot::anti(pb), Slot::holo(qa)])?.scale(him), vec![dq(qa, false), dq(pb, true)]));
            omm.push((d(&[Slot::anti(pb), Slot::anti(qa)])?.scale(him), vec![dq(qa, true), dq(pb, true)]));
        }
    }
    Ok(SymplecticForms {
        omega: real_form(&space, 2, n, &om),
        omega_plus: real_form(&space, 2, n, &op),
        omega_minus: real_form(&space, 2, n, &omm),
    })
}

/// `J± = −Ω⁻¹Ω±`.
pub(crate) fn structures(forms: &SymplecticForms) -> Result<(JetTensor, JetTensor)> {
    let oi = forms.omega.inverse("Omega")?;
    Ok((
        oi.matmul(&forms.omega_plus).scale(-1.0),
        oi.matmul(&forms.omega_minus).scale(-1.0),
    ))
}

#[derive(Debug)]
pub(crate) struct SymplecticSource {
    pub chart: Arc<Chart>,
    pub potential: Arc<dyn Potential>,
}

impl SymplecticSource {
    fn k(&self, point: &[f64]) -> Result<CJet> {
        let space = JetSpace::new(self.chart.real_dim(), 4)?;
        Ok(CJet::real(self.potential.jet(&space, point, 4)?))
    }
}

impl FieldSource for SymplecticSource {
    fn fields(&self, point: &[f64]) -> Result<PointFields> {
        let k = self.k(point)?;
        let forms = symplectic_forms(&self.chart, &k)?;
        let cond = condition_number(&forms.omega.matrix());
        if !(cond < 1e10) {
            return Err(GkError::PolarizationDegeneracy {
                block: "K_qP".into(),
                condition: cond,
            });
        }
        let (jp, jm) = structures(&forms)?;
        let comm = jp.matmul(&jm).sub(&jm.matmul(&jp));
        let g = forms.omega.matmul(&comm);
        let mut extras = BTreeMap::new();
        extras.insert("Omega".to_string(), forms.omega.value());
        Ok(PointFields {
            j_plus: jp,
            j_minus: jm,
            g,
            h: None,
            extras,
        })
    }
}

/// Build-time checks: regularity of both polarizations, `J±² = −1`,
/// nondegenerate `[J+, J−]`, closedness of the three forms, agreement with
/// the Jacobian pushforwards, `σ = Ω⁻¹` and positivity of `g`.
fn validate(source: &SymplecticSource, scenario: &PotentialScenario) -> Result<CheckReport> {
    let chart = &source.chart;
    let plus = chart.plus_signs();
    let points = scenario.points();
    let rows = map_points(&points, |p| {
        let k = source.k(p)?;
        let jpp = pushforward(chart, &k, Side::Plus, &plus, p, true)?;
        let jmp = pushforward(chart, &k, Side::Minus, &plus, p, true)?;
        let f = source.fields(p)?;
        let (jp, jm) = (f.j_plus.matrix(), f.j_minus.matrix());
        let sq = square_residual(&jp).max(square_residual(&jm));
        if sq > 1e-8 {
            return Err(GkError::InvalidPotential {
                reason: format!("J± = −Ω⁻¹Ω± does not square to −1 (residual {sq:.3e})"),
            });
        }
        let comm = &jp * &jm - &jm * &jp;
        let cc = condition_number(&comm);
        if !(cc < 1e10) {
            return Err(GkError::InvalidPotential {
                reason: format!("[J+, J−] is degenerate (condition number {cc:.3e}), so g = Ω[J+, J−] is not a metric"),
            });
        }
        let g = f.g.matrix();
        let e = min_eigen(&g);
        if !(e > 0.0) {
            return Err(GkError::Positivity {
                point: p.to_vec(),
                eigenvalue: e,
            });
        }
        let forms = symplectic_forms(chart, &k)?;
        let mut closed = 0.0f64;
        for w in [&forms.omega, &forms.omega_plus, &forms.omega_minus] {
            closed = closed.max(exterior_d(w)?.value().max_abs());
        }
        let scale = forms.omega.value().max_abs();
        let push = (&jpp.matrix() - &jp).abs().max().max((&jmp.matrix() - &jm).abs().max());
        // σ = [J+, J−] g⁻¹ must invert Ω
        let gi = g.clone().try_inverse().ok_or(GkError::Degenerate {
            what: "g".into(),
            condition: f64::INFINITY,
        })?;
        let n = g.nrows();
        let rt = (&comm * gi * forms.omega.matrix() - nalgebra::DMatrix::identity(n, n)).abs().max();
        Ok((sq, closed, scale, push, jp.abs().max().max(jm.abs().max()), rt))
    })?;
    let mut t = Tally::default();
    for (sq, closed, scale, push, js, rt) in rows {
        t.add("build.sigma_roundtrip", rt, 1.0);
        t.add("build.j_square", sq, 1.0);
        t.add("build.closed", closed, scale);
        t.add("build.pushforward", push, js);
    }
    let mut report = CheckReport::default();
    for l in t.into_lines(&scenario.tol) {
        report.push(l);
    }
    Ok(report)
}

/// `Ω = ½ Re Σ (K_{qP} dq∧dP + K_{qP̄} dq∧dP̄)`, `Ω±` from the mixed and
/// same-variable second derivatives, `J± = −Ω⁻¹Ω±`, `g = Ω[J+, J−]`.
pub fn build_symplectic(scenario: &PotentialScenario) -> Result<Built> {
    if scenario.case != Case::Symplectic {
        return Err(GkError::Precondition(format!(
            "scenario `{}` is tagged `{}`, not `symplectic`",
            scenario.name, scenario.case
        )));
    }
    scenario.validate_blocks()?;
    scenario.validate_real()?;
    let source = SymplecticSource {
        chart: scenario.chart.clone(),
        potential: super::effective_potential(scenario),
    };
    let report = validate(&source, scenario)?;
    let bundle = StructureBundle::new(&scenario.name, scenario.chart.clone(), Arc::new(source));
    Ok(Built { bundle, report })
}
