//! Čech data on a finite cover: gluing of potentials across overlaps and
//! gerbe cocycles on triple overlaps.

mod checks;
mod chern;
#[cfg(test)]
pub(crate) mod fixtures;

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charts::Chart;
use crate::error::{GkError, Result};
use crate::expr::ExprAst;
use crate::gkcore::Tolerances;

pub use checks::{check_commuting_gluing, check_cover, check_gerbe, check_kahler_gluing};
pub use chern::{chern_number, ChernPiece, ChernSpec, Region};

/// Which gluing picture the cover carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverKind {
    Kahler,
    Commuting,
    General,
}

#[derive(Clone, Debug)]
pub struct CoverChart {
    pub name: String,
    pub chart: Arc<Chart>,
    pub potential: Option<Arc<ExprAst>>,
}

/// Coordinates of chart `to` as complex expressions over chart `from`.
#[derive(Clone, Debug)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub map: Vec<Arc<ExprAst>>,
}

/// Data on `U_a ∩ U_b`, as expressions over the coordinates of `charts[0]`.
///
/// `f` is `F_ab` for a Kähler cover and `f_ab` for a commuting or general one.
#[derive(Clone, Debug, Default)]
pub struct DoubleOverlap {
    pub charts: [usize; 2],
    pub points: Vec<Vec<f64>>,
    /// The same points in other charts' coordinates, checked against the
    /// transition maps.
    pub points_in: Vec<(usize, Vec<Vec<f64>>)>,
    pub f: Option<Arc<ExprAst>>,
    pub g: Option<Arc<ExprAst>>,
    pub h_plus: Option<Arc<ExprAst>>,
    pub h_minus: Option<Arc<ExprAst>>,
}

/// `G_abc`, `F_abc` on a triple overlap, over `charts[0]`.
#[derive(Clone, Debug, Default)]
pub struct TripleOverlap {
    pub charts: [usize; 3],
    pub points: Vec<Vec<f64>>,
    pub g: Option<Arc<ExprAst>>,
    pub f: Option<Arc<ExprAst>>,
}

#[derive(Clone, Debug, Default)]
pub struct QuadOverlap {
    pub charts: [usize; 4],
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct CoverComplex {
    pub name: String,
    pub kind: CoverKind,
    pub charts: Vec<CoverChart>,
    pub transitions: Vec<Transition>,
    pub doubles: Vec<DoubleOverlap>,
    pub triples: Vec<TripleOverlap>,
    pub quads: Vec<QuadOverlap>,
    pub chern: Option<ChernSpec>,
    pub tol: Tolerances,
}

/// Pairwise quantity looked up with its antisymmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PairData {
    /// Additive: `x_ba = −x_ab` (`F_ab` and `f_ab`).
    F,
    /// Multiplicative: `h_ba = 1 / h_ab`.
    HPlus,
    HMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum TripleData {
    G,
    F,
}

/// Points in the annulus `r_min < |z| < r_max` of a one-dimensional chart,
/// uniform in radius and angle.
pub fn sample_annulus(count: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.random_range(r_min..r_max);
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            vec![r * t.cos(), r * t.sin()]
        })
        .collect()
}

fn parity(perm: &[usize]) -> bool {
    let mut even = true;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                even = !even;
            }
        }
    }
    even
}

impl CoverComplex {
    pub fn chart_index(&self, name: &str) -> Option<usize> {
        self.charts.iter().position(|c| c.name == name)
    }

    fn chart_name(&self, i: usize) -> &str {
        &self.charts[i].name
    }

    /// Maps real coordinates in chart `from` to chart `to`.
    pub fn map_point(&self, from: usize, to: usize, x: &[f64]) -> Result<Vec<f64>> {
        if from == to {
            return Ok(x.to_vec());
        }
        let t = self
            .transitions
            .iter()
            .find(|t| t.from == from && t.to == to)
            .ok_or_else(|| {
                GkError::Cover(format!(
                    "no transition from `{}` to `{}`",
                    self.chart_name(from),
                    self.chart_name(to)
                ))
            })?;
        let mut y = Vec::with_capacity(2 * t.map.len());
        for e in &t.map {
            let v = e.eval_complex(x)?;
            y.push(v.re);
            y.push(v.im);
        }
        Ok(y)
    }

    /// Real Jacobian of the transition `from → to` at `x`.
    pub fn transition_jacobian(&self, from: usize, to: usize, x: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let n = x.len();
        if from == to {
            return Ok(nalgebra::DMatrix::identity(n, n));
        }
        let t = self
            .transitions
            .iter()
            .find(|t| t.from == from && t.to == to)
            .ok_or_else(|| GkError::Cover(format!("no transition from `{}` to `{}`", self.chart_name(from), self.chart_name(to))))?;
        let space = crate::expr::JetSpace::new(n, 1)?;
        let mut d = nalgebra::DMatrix::zeros(2 * t.map.len(), n);
        for (k, e) in t.map.iter().enumerate() {
            let c = e.eval_cjet_in(&space, x, 1)?;
            for v in 0..n {
                let dv = c.derivative(v)?.value();
                d[(2 * k, v)] = dv.re;
                d[(2 * k + 1, v)] = dv.im;
            }
        }
        Ok(d)
    }

    /// Sample points stored in other charts must match the transition maps.
    pub fn validate(&self) -> Result<()> {
        for o in &self.doubles {
            for (c, pts) in &o.points_in {
                if pts.len() != o.points.len() {
                    return Err(GkError::Cover(format!(
                        "overlap ({}, {}) lists {} points but {} in `{}`",
                        self.chart_name(o.charts[0]),
                        self.chart_name(o.charts[1]),
                        o.points.len(),
                        pts.len(),
                        self.chart_name(*c)
                    )));
                }
                for (i, (x, y)) in o.points.iter().zip(pts).enumerate() {
                    let m = self.map_point(o.charts[0], *c, x)?;
                    let r = m.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if !(r <= 1e-10) {
                        return Err(GkError::Cover(format!(
                            "inconsistent overlap points for ({}, {}): point {i} maps to {m:?} in `{}`, stored {y:?}",
                            self.chart_name(o.charts[0]),
                            self.chart_name(o.charts[1]),
                            self.chart_name(*c)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `x_ab` at a point given in chart `c`; `None` if no overlap stores it.
    pub(crate) fn pair_value(&self, what: PairData, a: usize, b: usize, c: usize, x: &[f64]) -> Result<Option<Complex64>> {
        if a == b {
            return Ok(Some(match what {
                PairData::F => Complex64::new(0.0, 0.0),
                _ => Complex64::new(1.0, 0.0),
            }));
        }
        for o in &self.doubles {
            let reversed = if o.charts == [a, b] {
                false
            } else if o.charts == [b, a] {
                true
            } else {
                continue;
            };
            let e = match what {
                PairData::F => &o.f,
                PairData::HPlus => &o.h_plus,
                PairData::HMinus => &o.h_minus,
            };
            let Some(e) = e else { continue };
            let y = self.map_point(c, o.charts[0], x)?;
            let v = e.eval_complex(&y)?;
            return Ok(Some(match (what, reversed) {
                (_, false) => v,
                (PairData::F, true) => -v,
                (_, true) => v.inv(),
            }));
        }
        Ok(None)
    }

    /// `X_abc` at a point in chart `c`, inverting on odd permutations.
    pub(crate) fn triple_value(&self, what: TripleData, idx: [usize; 3], c: usize, x: &[f64]) -> Result<Option<Complex64>> {
        for o in &self.triples {
            let e = match what {
                TripleData::G => &o.g,
                TripleData::F => &o.f,
            };
            let Some(e) = e else { continue };
            let mut pos = [0usize; 3];
            let mut ok = true;
            for (k, i) in idx.iter().enumerate() {
                match o.charts.iter().position(|s| s == i) {
                    Some(p) => pos[k] = p,
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let y = self.map_point(c, o.charts[0], x)?;
            let v = e.eval_complex(&y)?;
            return Ok(Some(if parity(&pos) { v } else { v.inv() }));
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_parity() {
        assert!(parity(&[0, 1, 2]));
        assert!(!parity(&[1, 0, 2]));
        assert!(parity(&[1, 2, 0]));
        assert!(!parity(&[2, 1, 0]));
    }

    #[test]
    fn annulus_points_stay_inside() {
        for p in sample_annulus(200, 0.5, 2.0, 7) {
            let r = p[0].hypot(p[1]);
            assert!((0.5..2.0).contains(&r));
        }
    }
}
