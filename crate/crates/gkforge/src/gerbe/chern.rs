//! `∫ ω / 2π` over a surface presented as weighted chart regions.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::CoverComplex;
use crate::error::{GkError, Result};
use crate::expr::{ExprAst, JetSpace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    Disk { radius: f64 },
    Annulus { r_min: f64, r_max: f64 },
    Rect { x: [f64; 2], y: [f64; 2] },
}

/// One chart's share of the surface, optionally weighted by a partition
/// function.
#[derive(Clone, Debug)]
pub struct ChernPiece {
    pub chart: usize,
    pub region: Region,
    pub weight: Option<Arc<ExprAst>>,
}

#[derive(Clone, Debug)]
pub struct ChernSpec {
    pub pieces: Vec<ChernPiece>,
    pub expected: Option<f64>,
}

const START_NODES: usize = 16;
const MAX_LEVELS: usize = 5;
const REFINE_TOL: f64 = 1e-10;

/// `ω_xy / 2π` with `ω = i∂∂̄K`, i.e. `ΔK / 4π`.
fn density(k: &ExprAst, w: Option<&ExprAst>, space: &Arc<JetSpace>, x: f64, y: f64) -> Result<f64> {
    let p = [x, y];
    let j = k.eval_jet_in(space, &p, 2)?;
    let lap = j.partial(&[2, 0])? + j.partial(&[0, 2])?;
    let wt = match w {
        Some(w) => w.eval(&p)?,
        None => 1.0,
    };
    Ok(wt * lap / (4.0 * PI))
}

fn integrate_piece(k: &ExprAst, piece: &ChernPiece, n: usize) -> Result<f64> {
    let space = JetSpace::new(2, 2)?;
    let gl = GaussLegendre::new(n).map_err(|e| GkError::Precondition(format!("quadrature: {e}")))?;
    let w = piece.weight.as_deref();
    let mut err: Option<GkError> = None;
    let f = |x: f64, y: f64, err: &mut Option<GkError>| match density(k, w, &space, x, y) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    let value = match piece.region {
        Region::Disk { radius } => polar(&gl, 0.0, radius, n, &mut |x, y| f(x, y, &mut err)),
        Region::Annulus { r_min, r_max } => polar(&gl, r_min, r_max, n, &mut |x, y| f(x, y, &mut err)),
        Region::Rect { x, y } => gl.integrate(x[0], x[1], |u| gl.integrate(y[0], y[1], |v| f(u, v, &mut err))),
    };
    match err {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Gauss–Legendre in the radius, trapezoid (spectral for periodic
/// integrands) in the angle.
fn polar(gl: &GaussLegendre, r0: f64, r1: f64, n: usize, f: &mut dyn FnMut(f64, f64) -> f64) -> f64 {
    let m = 2 * n;
    gl.integrate(r0, r1, |r| {
        let mut s = 0.0;
        for k in 0..m {
            let t = TAU * k as f64 / m as f64;
            s += f(r * t.cos(), r * t.sin());
        }
        s * r * TAU / m as f64
    })
}

/// Integral of `ω/2π` over the pieces, refined by doubling the node count
/// until successive values agree to 1e-10.
pub fn chern_number(cover: &CoverComplex) -> Result<f64> {
    let spec = cover
        .chern
        .as_ref()
        .ok_or_else(|| GkError::Precondition(format!("cover `{}` has no Chern quadrature", cover.name)))?;
    let mut total = 0.0;
    for piece in &spec.pieces {
        let c = cover
            .charts
            .get(piece.chart)
            .ok_or_else(|| GkError::Cover(format!("Chern piece names chart {}", piece.chart)))?;
        if c.chart.complex_dim() != 1 {
            return Err(GkError::Precondition(format!(
                "Chern integral needs one-dimensional charts, `{}` has {}",
                c.name,
                c.chart.complex_dim()
            )));
        }
        let k = c
            .potential
            .as_ref()
            .ok_or_else(|| GkError::Cover(format!("chart `{}` has no potential", c.name)))?;
        let mut n = START_NODES;
        let mut prev = integrate_piece(k, piece, n)?;
        let mut level = 0;
        loop {
            n *= 2;
            level += 1;
            let next = integrate_piece(k, piece, n)?;
            let gap = (next - prev).abs();
            if gap <= REFINE_TOL * next.abs().max(1.0) {
                total += next;
                break;
            }
            if level >= MAX_LEVELS {
                return Err(GkError::NonConvergence {
                    iterations: level,
                    residual: gap,
                });
            }
            prev = next;
        }
    }
    Ok(total)
}
