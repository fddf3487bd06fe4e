//! Leaf-block polarizations: Jacobian pushforward of standard structures
//! through `(q, P) ↦ (q, p = ∂K/∂q)` and `(q, P) ↦ (Q = ∂K/∂P, P)`.

use std::sync::Arc;

use crate::charts::{condition_number, standard_structure, Chart, JetTensor, Role};
use crate::error::{GkError, Result};
use crate::expr::{wirtinger_chain, CJet, Jet, JetSpace, Slot};

/// Leaf pairs `(q_a, P_a)` as complex coordinate indices.
pub(crate) fn leaf_pairs(chart: &Chart) -> Vec<(usize, usize)> {
    chart
        .block(Role::LeafQ)
        .into_iter()
        .zip(chart.block(Role::LeafP))
        .collect()
}

/// Which side of the polarization a structure comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    /// `P ↦ p = ∂K/∂q`, giving `J+`.
    Plus,
    /// `q ↦ Q = ∂K/∂P`, giving `J−`.
    Minus,
}

/// Real Jacobian of the coordinate change, as order-2 jets.
///
/// `k` must be a complex jet of order ≥ 3.
pub(crate) fn jacobian(chart: &Chart, k: &CJet, side: Side) -> Result<JetTensor> {
    let n = chart.real_dim();
    let space: Arc<JetSpace> = k.re.space().clone();
    let pairs = chart.pairs();
    let mut rows: Vec<Vec<Jet>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| Jet::constant(&space, 2, if r == c { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for (q, p) in leaf_pairs(chart) {
        let (replaced, by) = match side {
            Side::Plus => (p, q),
            Side::Minus => (q, p),
        };
        let f = wirtinger_chain(k, &pairs, &[Slot::holo(by)])?;
        for c in 0..n {
            rows[2 * replaced][c] = f.re.derivative(c)?.truncate(2);
            rows[2 * replaced + 1][c] = f.im.derivative(c)?.truncate(2);
        }
    }
    let mut it = rows.into_iter().flatten();
    Ok(JetTensor::from_fn(n, 2, |_| it.next().expect("n×n")))
}

/// Condition number of the leaf block `∂p/∂P` (plus) or `∂Q/∂q` (minus).
pub(crate) fn leaf_block_condition(chart: &Chart, d: &JetTensor, side: Side) -> f64 {
    let lp = leaf_pairs(chart);
    if lp.is_empty() {
        return 1.0;
    }
    let idx: Vec<usize> = lp
        .iter()
        .flat_map(|&(q, p)| {
            let c = match side {
                Side::Plus => p,
                Side::Minus => q,
            };
            [2 * c, 2 * c + 1]
        })
        .collect();
    let m = d.matrix();
    let block = nalgebra::DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
    condition_number(&block)
}

pub(crate) fn block_name(side: Side) -> &'static str {
    match side {
        Side::Plus => "dp/dP",
        Side::Minus => "dQ/dq",
    }
}

/// `J = D⁻¹ J₀ D` with `J₀` standard for the given signs.
pub(crate) fn pushforward(
    chart: &Chart,
    k: &CJet,
    side: Side,
    signs: &[f64],
    point: &[f64],
    degenerate_as_polarization: bool,
) -> Result<JetTensor> {
    let d = jacobian(chart, k, side)?;
    let cond = leaf_block_condition(chart, &d, side);
    if !(cond < 1e10) {
        let block = block_name(side).to_string();
        return Err(if degenerate_as_polarization {
            GkError::PolarizationDegeneracy {
                block,
                condition: cond,
            }
        } else {
            GkError::Regularity {
                block,
                point: point.to_vec(),
                condition: cond,
            }
        });
    }
    let j0 = JetTensor::from_matrix(d.space(), 2, &standard_structure(signs));
    let di = d.inverse(block_name(side))?;
    Ok(di.matmul(&j0).matmul(&d))
}
