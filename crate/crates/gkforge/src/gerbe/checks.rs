use num_complex::Complex64;

use super::{CoverComplex, CoverKind, PairData, TripleData};
use crate::charts::{Chart, Role};
use crate::error::{GkError, Result};
use crate::expr::{wirtinger_chain, ExprAst, JetSpace, Slot};
use crate::gkcore::report::Tally;
use crate::gkcore::{CheckLine, CheckReport};
use crate::potentials::hessian_forms;

type Allowed = &'static [(Role, bool)];

/// Every coordinate holomorphic.
const HOLO: Allowed = &[(Role::Z, false), (Role::ZPrime, false), (Role::LeafQ, false), (Role::LeafP, false)];
/// `J+`-holomorphic of special type: `(z, z′, q)`.
const PLUS: Allowed = &[(Role::Z, false), (Role::ZPrime, false), (Role::LeafQ, false)];
/// `J−`-holomorphic of special type: `(z, z̄′, P)`.
const MINUS: Allowed = &[(Role::Z, false), (Role::ZPrime, true), (Role::LeafP, false)];
/// Holomorphic for both structures: `z` only.
const BIHOLO: Allowed = &[(Role::Z, false)];
/// `J+`-holomorphic and `J−`-antiholomorphic: `z′` only.
const TWISTED: Allowed = &[(Role::ZPrime, false)];

/// Largest Wirtinger derivative of `e` in a forbidden direction; divided by
/// `|e|` for multiplicative data (a log-derivative).
fn type_residual(chart: &Chart, e: &ExprAst, x: &[f64], allowed: Allowed, multiplicative: bool) -> Result<f64> {
    let space = JetSpace::new(chart.real_dim(), 1)?;
    let c = e.eval_cjet_in(&space, x, 1)?;
    let pairs = chart.pairs();
    let scale = if multiplicative { c.value().norm() } else { 1.0 };
    let mut worst = 0.0f64;
    for (k, coord) in chart.coords().iter().enumerate() {
        for conj in [false, true] {
            if allowed.contains(&(coord.role, conj)) {
                continue;
            }
            let d = wirtinger_chain(&c, &pairs, &[Slot { pair: k, conj }])?.value();
            worst = worst.max(d.norm() / scale);
        }
    }
    Ok(worst)
}

fn potential(cover: &CoverComplex, i: usize) -> Result<&ExprAst> {
    cover.charts[i]
        .potential
        .as_deref()
        .ok_or_else(|| GkError::Cover(format!("chart `{}` has no potential", cover.charts[i].name)))
}

fn finish(t: Tally, cover: &CoverComplex) -> CheckReport {
    let mut r = CheckReport::default();
    for l in t.into_lines(&cover.tol) {
        r.push(l);
    }
    r
}

fn missing(cover: &CoverComplex, what: &str, idx: &[usize]) -> GkError {
    let names: Vec<&str> = idx.iter().map(|&i| cover.charts[i].name.as_str()).collect();
    GkError::Cover(format!("no {what} stored for ({})", names.join(", ")))
}

/// Line-bundle gluing: `K_a − K_b = F_ab + F̄_ab`, `F_ab` holomorphic,
/// `G = exp F` a cocycle on triples with `|G_ab|² = exp(K_a − K_b)`.
pub fn check_kahler_gluing(cover: &CoverComplex) -> Result<CheckReport> {
    cover.validate()?;
    let mut t = Tally::default();
    for o in &cover.doubles {
        let Some(f) = &o.f else { continue };
        let [a, b] = o.charts;
        let (ka, kb) = (potential(cover, a)?, potential(cover, b)?);
        let chart = &cover.charts[a].chart;
        for x in &o.points {
            let va = ka.eval(x)?;
            let vb = kb.eval(&cover.map_point(a, b, x)?)?;
            let fv = f.eval_complex(x)?;
            t.add("gluing.potential", (va - vb - 2.0 * fv.re).abs(), va.abs());
            t.add("gluing.holomorphic", type_residual(chart, f, x, HOLO, false)?, 1.0);
            t.add("gluing.hermitian", ((2.0 * fv.re - (va - vb)).exp() - 1.0).abs(), 1.0);
        }
    }
    for o in &cover.triples {
        let [a, b, c] = o.charts;
        for x in &o.points {
            let mut sum = Complex64::new(0.0, 0.0);
            for (p, q) in [(a, b), (b, c), (c, a)] {
                sum += cover
                    .pair_value(PairData::F, p, q, a, x)?
                    .ok_or_else(|| missing(cover, "F", &[p, q]))?;
            }
            t.add("gluing.cocycle", (sum.exp() - 1.0).norm(), 1.0);
        }
    }
    Ok(finish(t, cover))
}

/// Commuting-case gluing: `K_a − K_b = 2 Re(f_ab + g_ab)` with `f` `J+`- and
/// `g` `J−`-holomorphic, and `ω±` equal from both sides.
pub fn check_commuting_gluing(cover: &CoverComplex) -> Result<CheckReport> {
    cover.validate()?;
    let mut t = Tally::default();
    for o in &cover.doubles {
        if o.f.is_none() && o.g.is_none() {
            continue;
        }
        let [a, b] = o.charts;
        let (ka, kb) = (potential(cover, a)?, potential(cover, b)?);
        let (ca, cb) = (&cover.charts[a].chart, &cover.charts[b].chart);
        for x in &o.points {
            let y = cover.map_point(a, b, x)?;
            let va = ka.eval(x)?;
            let vb = kb.eval(&y)?;
            let mut diff = va - vb;
            if let Some(f) = &o.f {
                diff -= 2.0 * f.eval_complex(x)?.re;
                t.add("gluing.f_holomorphic", type_residual(ca, f, x, PLUS, false)?, 1.0);
            }
            if let Some(g) = &o.g {
                diff -= 2.0 * g.eval_complex(x)?.re;
                t.add("gluing.g_holomorphic", type_residual(ca, g, x, MINUS, false)?, 1.0);
            }
            t.add("gluing.potential", diff.abs(), va.abs());
            let (pa, ma) = hessian_forms(ca, ka, x)?;
            let (pb, mb) = hessian_forms(cb, kb, &y)?;
            let d = cover.transition_jacobian(a, b, x)?;
            for (name, wa, wb) in [("gluing.omega_plus", pa, pb), ("gluing.omega_minus", ma, mb)] {
                let pulled = d.transpose() * wb * &d;
                t.add(name, (&pulled - &wa).abs().max(), wa.abs().max());
            }
        }
    }
    Ok(finish(t, cover))
}

/// Gerbe checks; each sub-check runs only where its data are present.
pub fn check_gerbe(cover: &CoverComplex) -> Result<CheckReport> {
    cover.validate()?;
    let mut t = Tally::default();
    let one = Complex64::new(1.0, 0.0);
    for (what, name) in [(TripleData::G, "gerbe.cocycle_G"), (TripleData::F, "gerbe.cocycle_F")] {
        let stored = cover.triples.iter().any(|o| match what {
            TripleData::G => o.g.is_some(),
            TripleData::F => o.f.is_some(),
        });
        if !stored {
            continue;
        }
        for q in &cover.quads {
            let [a, b, c, d] = q.charts;
            for x in &q.points {
                let mut v = one;
                for (k, idx) in [[b, c, d], [a, c, d], [a, b, d], [a, b, c]].into_iter().enumerate() {
                    let w = cover.triple_value(what, idx, a, x)?.ok_or_else(|| missing(cover, name, &idx))?;
                    v *= if k % 2 == 0 { w } else { w.inv() };
                }
                t.add(name, (v - one).norm(), 1.0);
            }
        }
    }
    for (i, o) in cover.triples.iter().enumerate() {
        for p in cover.triples.iter().skip(i + 1) {
            let mut sorted_o = o.charts;
            let mut sorted_p = p.charts;
            sorted_o.sort_unstable();
            sorted_p.sort_unstable();
            if sorted_o != sorted_p {
                continue;
            }
            let pos: Vec<usize> = o.charts.iter().map(|c| p.charts.iter().position(|s| s == c).expect("same set")).collect();
            let even = super::parity(&pos);
            for (eo, ep, name) in [(&o.g, &p.g, "gerbe.antisymmetry_G"), (&o.f, &p.f, "gerbe.antisymmetry_F")] {
                let (Some(eo), Some(ep)) = (eo, ep) else { continue };
                for x in &o.points {
                    let vo = eo.eval_complex(x)?;
                    let vp = ep.eval_complex(&cover.map_point(o.charts[0], p.charts[0], x)?)?;
                    let vp = if even { vp } else { vp.inv() };
                    t.add(name, (vo / vp - one).norm(), 1.0);
                }
            }
        }
    }
    for o in &cover.triples {
        let [a, b, c] = o.charts;
        let chart = &cover.charts[a].chart;
        for x in &o.points {
            if let Some(g) = &o.g {
                t.add("gerbe.G_holomorphic", type_residual(chart, g, x, BIHOLO, true)?, 1.0);
            }
            if let Some(f) = &o.f {
                t.add("gerbe.F_holomorphic", type_residual(chart, f, x, TWISTED, true)?, 1.0);
            }
            if o.g.is_none() && o.f.is_none() {
                continue;
            }
            let gv = match &o.g {
                Some(g) => g.eval_complex(x)?,
                None => one,
            };
            let fv = match &o.f {
                Some(f) => f.eval_complex(x)?,
                None => one,
            };
            for (what, name, lhs) in [
                (PairData::HPlus, "gerbe.hermitian_plus", gv / fv),
                (PairData::HMinus, "gerbe.hermitian_minus", gv * fv.conj()),
            ] {
                let mut prod = one;
                let mut found = true;
                for (p, q) in [(a, b), (b, c), (c, a)] {
                    match cover.pair_value(what, p, q, a, x)? {
                        Some(h) => prod *= h,
                        None => found = false,
                    }
                }
                if found {
                    t.add(name, (lhs / prod - one).norm(), 1.0);
                }
            }
        }
    }
    for o in &cover.doubles {
        let [a, b] = o.charts;
        let chart = &cover.charts[a].chart;
        for x in &o.points {
            if let Some(h) = &o.h_plus {
                t.add("gerbe.h_plus_type", type_residual(chart, h, x, PLUS, true)?, 1.0);
                if let Some(f) = &o.f {
                    let r = h.eval_complex(x)? * (-f.eval_complex(x)?).exp();
                    t.add("gerbe.h_plus_exp_f", (r - one).norm(), 1.0);
                }
            }
            if let Some(h) = &o.h_minus {
                t.add("gerbe.h_minus_type", type_residual(chart, h, x, MINUS, true)?, 1.0);
                if let Some(g) = &o.g {
                    let r = h.eval_complex(x)? * (-g.eval_complex(x)?).exp();
                    t.add("gerbe.h_minus_exp_g", (r - one).norm(), 1.0);
                }
            }
            let (Some(hp), Some(hm)) = (&o.h_plus, &o.h_minus) else { continue };
            let (Some(ka), Some(kb)) = (&cover.charts[a].potential, &cover.charts[b].potential) else {
                continue;
            };
            let dk = ka.eval(x)? - kb.eval(&cover.map_point(a, b, x)?)?;
            let lhs = hp.eval_complex(x)?.norm_sqr() * hm.eval_complex(x)?.norm_sqr();
            t.add("gerbe.potential", (lhs * (-dk).exp() - 1.0).abs(), 1.0);
        }
    }
    Ok(finish(t, cover))
}

/// All checks appropriate to the cover kind, plus the Chern integral when a
/// quadrature is supplied.
pub fn check_cover(cover: &CoverComplex) -> Result<CheckReport> {
    let mut report = match cover.kind {
        CoverKind::Kahler => check_kahler_gluing(cover)?,
        CoverKind::Commuting | CoverKind::General => {
            let mut r = check_commuting_gluing(cover)?;
            r.merge(check_gerbe(cover)?);
            r
        }
    };
    if let Some(spec) = &cover.chern {
        let c = super::chern_number(cover)?;
        let target = spec.expected.unwrap_or(c.round());
        let r = (c - target).abs();
        report.push(CheckLine::new("chern.number", r, r, 1, cover.tol.get("chern.number")).with_value(c));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{commuting_pair, cp1, parse, toy_g_text, toy_gerbe, toy_h_plus_text};
    use super::super::{chern_number, ChernPiece, ChernSpec, CoverChart, Region};
    use super::*;
    use crate::charts::{Chart, Coord, Role};
    use std::sync::Arc;

    fn line<'a>(r: &'a CheckReport, name: &str) -> &'a CheckLine {
        r.get(name).unwrap_or_else(|| panic!("no line {name} in {:?}", r.lines))
    }

    #[test]
    fn cp1_line_bundle_glues() {
        let r = check_kahler_gluing(&cp1("log(z)")).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        for n in ["gluing.potential", "gluing.holomorphic", "gluing.hermitian"] {
            assert!(line(&r, n).max_abs <= 1e-10, "{n}");
        }
    }

    #[test]
    fn antiholomorphic_term_in_transition_is_reported() {
        let r = check_kahler_gluing(&cp1("log(z) + 0.01*conj(z)")).unwrap();
        let h = line(&r, "gluing.holomorphic");
        assert!(!h.pass);
        assert!((h.max_abs - 0.01).abs() < 1e-12, "{}", h.max_abs);
    }

    #[test]
    fn single_chart_is_vacuous() {
        let mut c = cp1("log(z)");
        c.charts.truncate(1);
        c.transitions.clear();
        c.doubles.clear();
        let r = check_kahler_gluing(&c).unwrap();
        assert!(r.lines.is_empty() && r.passed());
    }

    #[test]
    fn inconsistent_overlap_points_abort() {
        let mut c = cp1("log(z)");
        c.doubles[0].points_in[0].1[3][0] += 1e-6;
        let e = check_kahler_gluing(&c).unwrap_err();
        assert!(matches!(e, GkError::Cover(ref m) if m.contains("u0") && m.contains("u1")), "{e}");
    }

    #[test]
    fn fubini_study_chern_number_is_one() {
        let mut c = cp1("log(z)");
        c.chern = Some(ChernSpec {
            pieces: (0..2)
                .map(|chart| ChernPiece {
                    chart,
                    region: Region::Disk { radius: 1.0 },
                    weight: None,
                })
                .collect(),
            expected: Some(1.0),
        });
        // each unit disk carries half: 1 − 1/(1 + r²) at r = 1
        let v = chern_number(&c).unwrap();
        assert!((v - 1.0).abs() <= 1e-6, "{v}");
        let r = check_cover(&c).unwrap();
        assert!(line(&r, "chern.number").pass);
    }

    fn single(k: &str, region: Region) -> CoverComplex {
        let chart = Arc::new(Chart::new("t", vec![Coord::new("z", Role::Z)]).unwrap());
        let mut c = cp1("log(z)");
        c.charts = vec![CoverChart {
            name: "t".into(),
            potential: Some(parse(&chart, k)),
            chart,
        }];
        c.transitions.clear();
        c.doubles.clear();
        c.chern = Some(ChernSpec {
            pieces: vec![ChernPiece {
                chart: 0,
                region,
                weight: None,
            }],
            expected: None,
        });
        c
    }

    #[test]
    fn flat_torus_of_class_two() {
        // ω/2π = (4c/4π) dx∧dy over the unit square, so c = 2π gives 2
        let c = single(&format!("{}*abs2(z)", std::f64::consts::TAU), Region::Rect { x: [0.0, 1.0], y: [0.0, 1.0] });
        let v = chern_number(&c).unwrap();
        assert!((v - 2.0).abs() <= 1e-6, "{v}");
    }

    #[test]
    fn zero_form_integrates_to_zero() {
        let c = single("re(z*z) + 3", Region::Disk { radius: 2.0 });
        assert!(chern_number(&c).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn commuting_gluing_of_flat_pair() {
        let r = check_commuting_gluing(&commuting_pair("-0.5*z*zp", None)).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert!(line(&r, "gluing.potential").max_abs <= 1e-10);
        assert!(line(&r, "gluing.omega_plus").max_abs <= 1e-12);
        assert!(line(&r, "gluing.omega_minus").max_abs <= 1e-12);
    }

    #[test]
    fn commuting_transition_with_conjugate_fails_typing() {
        let r = check_commuting_gluing(&commuting_pair("-0.5*z*zp + 0.01*conj(z)", None)).unwrap();
        assert!(!line(&r, "gluing.f_holomorphic").pass);
    }

    #[test]
    fn constant_transition_leaves_forms_alone() {
        let mut c = commuting_pair("2", None);
        let ch = c.charts[1].chart.clone();
        c.charts[1].potential = Some(parse(&ch, "abs2(z) - abs2(zp) - 4"));
        let r = check_commuting_gluing(&c).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
    }

    #[test]
    fn coboundary_gerbe_closes_on_quadruples() {
        let r = check_gerbe(&toy_gerbe(None)).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert!(line(&r, "gerbe.cocycle_G").max_abs <= 1e-12);
        assert!(line(&r, "gerbe.cocycle_F").max_abs <= 1e-12);
        assert!(line(&r, "gerbe.hermitian_plus").max_abs <= 1e-12);
        assert!(line(&r, "gerbe.hermitian_minus").max_abs <= 1e-12);
    }

    #[test]
    fn trivial_gerbe_passes() {
        let mut c = toy_gerbe(Some([0.0; 4]));
        let ch = c.charts[0].chart.clone();
        for o in &mut c.doubles {
            o.f = Some(parse(&ch, "0"));
            o.g = Some(parse(&ch, "0"));
            o.h_plus = Some(parse(&ch, "1"));
            o.h_minus = Some(parse(&ch, "1"));
        }
        for o in &mut c.triples {
            o.g = Some(parse(&ch, "1"));
            o.f = Some(parse(&ch, "1"));
        }
        let r = check_cover(&c).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
    }

    #[test]
    fn full_gluing_data_are_consistent() {
        let r = check_cover(&toy_gerbe(Some([0.1, -0.3, 0.25, 0.0]))).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        for n in ["gerbe.potential", "gerbe.h_plus_exp_f", "gerbe.h_minus_exp_g", "gluing.potential"] {
            assert!(line(&r, n).max_abs <= 1e-12, "{n}");
        }
    }

    #[test]
    fn planted_antiholomorphic_cocycle() {
        let mut c = toy_gerbe(None);
        let ch = c.charts[0].chart.clone();
        let g = toy_g_text(None, c.triples[0].charts);
        c.triples[0].g = Some(parse(&ch, &format!("({g})*exp(0.01*conj(z))")));
        let r = check_gerbe(&c).unwrap();
        let hol = line(&r, "gerbe.G_holomorphic");
        let coc = line(&r, "gerbe.cocycle_G");
        assert!(!hol.pass && !coc.pass);
        assert!((hol.max_abs - 0.01).abs() < 1e-12);
        assert!(coc.max_abs > 0.005 && coc.max_abs < 0.02, "{}", coc.max_abs);
        assert!(line(&r, "gerbe.F_holomorphic").pass);
    }

    #[test]
    fn planted_bihermitian_break() {
        let mut c = toy_gerbe(None);
        let ch = c.charts[0].chart.clone();
        let [a, b] = c.doubles[0].charts;
        let h = toy_h_plus_text(None, a, b);
        c.doubles[0].h_plus = Some(parse(&ch, &format!("1.01*({h})")));
        let r = check_gerbe(&c).unwrap();
        let l = line(&r, "gerbe.hermitian_plus");
        assert!(!l.pass);
        assert!(l.max_abs > 0.005 && l.max_abs < 0.02, "{}", l.max_abs);
        assert!(line(&r, "gerbe.hermitian_minus").pass);
        assert!(line(&r, "gerbe.cocycle_G").pass);
    }

    #[test]
    fn permuted_triple_is_inverted() {
        let c = toy_gerbe(None);
        let x = &c.triples[0].points[0];
        let v = c.triple_value(TripleData::G, [0, 1, 2], 0, x).unwrap().unwrap();
        let w = c.triple_value(TripleData::G, [1, 0, 2], 0, x).unwrap().unwrap();
        let u = c.triple_value(TripleData::G, [1, 2, 0], 0, x).unwrap().unwrap();
        assert!((v * w - 1.0).norm() < 1e-14);
        assert!((v - u).norm() < 1e-14);
    }
}
