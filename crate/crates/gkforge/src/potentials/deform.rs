//! Deformation families `K + tφ` and their positivity radius.

use std::sync::Arc;

use super::hessian::{build_hessian, min_eigen, HessianSource};
use super::scenario::{Case, ExprPotential, Potential, PotentialScenario, SumPotential};
use super::Built;
use crate::error::{GkError, Result};
use crate::expr::ExprAst;
use crate::gkcore::{map_points, CheckLine, FieldSource};

/// Bisection resolution of the positivity radius.
pub const RADIUS_RESOLUTION: f64 = 1e-3;

/// Largest `|t|` in each direction keeping `g` positive at every sample,
/// capped at `cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivityRadius {
    pub positive: f64,
    pub negative: f64,
    pub cap: f64,
}

/// A deformed bundle plus its radius.
#[derive(Clone, Debug)]
pub struct Deformed {
    pub built: Built,
    /// Largest gap between building from `K + tφ` directly and summing the
    /// forms of `K` and `tφ`.
    pub path_gap: f64,
    pub radius: PositivityRadius,
}

fn check_case(s: &PotentialScenario) -> Result<()> {
    match s.case {
        Case::Kahler | Case::Commuting => Ok(()),
        other => Err(GkError::Precondition(format!(
            "deformations are defined for kahler and commuting scenarios, not `{other}`"
        ))),
    }
}

fn summed(s: &PotentialScenario, phi: &str, t: f64) -> Result<PotentialScenario> {
    let ast = Arc::new(s.chart.parse(phi)?);
    let p: Arc<dyn Potential> = Arc::new(SumPotential(vec![
        (1.0, s.potential.clone()),
        (t, Arc::new(ExprPotential(ast))),
    ]));
    let mut out = s.with_potential(p, None);
    out.deformation = None;
    Ok(out)
}

/// Whether `K + tφ` gives a positive metric at every sample point.
fn positive_at(s: &PotentialScenario, phi: &Arc<ExprAst>, t: f64) -> Result<bool> {
    let source = HessianSource {
        chart: s.chart.clone(),
        terms: vec![(1.0, s.potential.clone()), (t, Arc::new(ExprPotential(phi.clone())))],
        with_h: false,
    };
    let eig = map_points(&s.points(), |p| Ok(min_eigen(&source.fields(p)?.g.matrix())))?;
    Ok(eig.iter().all(|&e| e > 0.0))
}

/// Bisection for the largest `t ∈ [0, cap]` (or `[−cap, 0]`) keeping positivity.
pub fn positivity_radius(scenario: &PotentialScenario, phi: &str, cap: f64) -> Result<PositivityRadius> {
    check_case(scenario)?;
    let phi = &Arc::new(scenario.chart.parse(phi)?);
    if !positive_at(scenario, phi, 0.0)? {
        return Err(GkError::Precondition(format!(
            "base scenario `{}` is not positive",
            scenario.name
        )));
    }
    let mut out = [0.0; 2];
    for (slot, sign) in [(0, 1.0), (1, -1.0)] {
        if positive_at(scenario, phi, sign * cap)? {
            out[slot] = cap;
            continue;
        }
        let (mut lo, mut hi) = (0.0, cap);
        while hi - lo > RADIUS_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if positive_at(scenario, phi, sign * mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out[slot] = lo;
    }
    Ok(PositivityRadius {
        positive: out[0],
        negative: out[1],
        cap,
    })
}

/// `K → K + tφ`. Builds both through the summed potential and through the
/// summed forms, asserts they agree to 1e-12, and reports the radius (probed
/// up to `max(1, 2|t|)`).
pub fn deform(scenario: &PotentialScenario, phi: &str, t: f64) -> Result<Deformed> {
    check_case(scenario)?;
    let a = build_hessian(&summed(scenario, phi, t)?, scenario.case)?;
    let b = build_hessian(&scenario.clone().with_deformation(phi, t)?, scenario.case)?;
    let points = scenario.points();
    let gaps = map_points(&points, |p| {
        let fa = a.bundle.fields(p)?;
        let fb = b.bundle.fields(p)?;
        let mut gap = (fa.g.matrix() - fb.g.matrix()).abs().max();
        if let (Some(ha), Some(hb)) = (&fa.h, &fb.h) {
            gap = gap.max(ha.value().dist(&hb.value()));
        }
        Ok(gap)
    })?;
    let path_gap = gaps.iter().copied().fold(0.0, f64::max);
    if !(path_gap <= 1e-12) {
        return Err(GkError::Convention {
            what: "K + tφ built directly vs summed forms".into(),
            residual: path_gap,
        });
    }
    let radius = positivity_radius(scenario, phi, (2.0 * t.abs()).max(1.0))?;
    let mut built = b;
    built
        .report
        .push(CheckLine::new("build.deform_paths", path_gap, path_gap, points.len(), 1e-12));
    Ok(Deformed {
        built,
        path_gap,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{Chart, Coord, Role};

    fn flat() -> PotentialScenario {
        let chart = Chart::new("k", vec![Coord::new("z", Role::Z)]).unwrap();
        PotentialScenario::parse("flat", chart, Case::Kahler, "abs2(z)")
            .unwrap()
            .with_sampling(0.5, 30, 4)
    }

    #[test]
    fn pluriharmonic_phi_changes_nothing() {
        let s = flat();
        let d = deform(&s, "re(z*z)", 0.7).unwrap();
        let base = super::super::build_kahler(&s).unwrap();
        for p in s.points() {
            let a = d.built.bundle.fields(&p).unwrap().g.matrix();
            let b = base.bundle.fields(&p).unwrap().g.matrix();
            assert!((a - b).abs().max() < 1e-14);
        }
    }

    #[test]
    fn quartic_radius_matches_eigenvalue_oracle() {
        // g = 2(1 + 4t|z|²) I, so positivity fails once t < −1/(4 max|z|²)
        let s = flat();
        let r = positivity_radius(&s, "abs2(z)*abs2(z)", 2.0).unwrap();
        let m = s.points().iter().map(|p| p[0] * p[0] + p[1] * p[1]).fold(0.0, f64::max);
        let oracle = 1.0 / (4.0 * m);
        assert_eq!(r.positive, 2.0);
        assert!(oracle - r.negative >= 0.0 && oracle - r.negative <= RADIUS_RESOLUTION, "{r:?} vs {oracle}");
    }

    #[test]
    fn outside_radius_is_positivity_error() {
        let e = deform(&flat(), "abs2(z)*abs2(z)", -20.0).unwrap_err();
        assert!(matches!(e.root(), GkError::Positivity { .. }), "{e}");
    }
}
