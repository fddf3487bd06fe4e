//! Levi-Civita and Bismut-type connections.

use nalgebra::DMatrix;

use super::tensor::{condition_number, JetTensor, Tensor};
use crate::error::{GkError, Result};

/// Inverse of a metric value, rejecting (near-)singular input.
pub fn metric_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cond = condition_number(g);
    if !(cond < 1e12) {
        return Err(GkError::Degenerate {
            what: "metric".into(),
            condition: cond,
        });
    }
    g.clone().try_inverse().ok_or(GkError::Degenerate {
        what: "metric".into(),
        condition: f64::INFINITY,
    })
}

/// `Γ^i_{jk} = ½ g^{il}(∂_j g_{lk} + ∂_k g_{lj} − ∂_l g_{jk})`.
pub fn christoffel(g: &JetTensor) -> Result<Tensor> {
    let n = g.dim();
    let gi = metric_inverse(&g.matrix())?;
    let d = g.gradient_values()?;
    let lower = Tensor::from_fn(n, 3, |idx| {
        let (l, j, k) = (idx[0], idx[1], idx[2]);
        d[j].get(&[l, k]) + d[k].get(&[l, j]) - d[l].get(&[j, k])
    });
    Ok(Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        0.5 * (0..n).map(|l| gi[(i, l)] * lower.get(&[l, j, k])).sum::<f64>()
    }))
}

/// `(g⁻¹H)^i_{jk} = g^{il} H_{jlk}`.
pub fn raised_torsion(g_inv: &DMatrix<f64>, h: &Tensor) -> Tensor {
    let n = h.dim();
    Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        (0..n).map(|l| g_inv[(i, l)] * h.get(&[j, l, k])).sum()
    })
}

/// `(∇_k J)^i_j` for `∇ = Γ + sign·κ·g⁻¹H`, returned with slot order `k, i, j`.
pub fn covariant_deriv_j(
    g: &JetTensor,
    h: &Tensor,
    j: &JetTensor,
    sign: f64,
    kappa: f64,
) -> Result<Tensor> {
    let n = g.dim();
    let lc = christoffel(g)?;
    let gi = metric_inverse(&g.matrix())?;
    let tor = raised_torsion(&gi, h);
    let gamma = Tensor::from_fn(n, 3, |idx| lc.get(idx) + sign * kappa * tor.get(idx));
    let jv = j.value();
    let dj = j.gradient_values()?;
    Ok(Tensor::from_fn(n, 3, |idx| {
        let (k, i, jj) = (idx[0], idx[1], idx[2]);
        let mut acc = *dj[k].get(&[i, jj]);
        for l in 0..n {
            acc += gamma.get(&[i, k, l]) * jv.get(&[l, jj]) - gamma.get(&[l, k, jj]) * jv.get(&[i, l]);
        }
        acc
    }))
}

/// `∇_k g_{ij}` for the Levi-Civita connection; vanishes identically.
pub fn metric_compatibility(g: &JetTensor) -> Result<Tensor> {
    let n = g.dim();
    let lc = christoffel(g)?;
    let gv = g.value();
    let d = g.gradient_values()?;
    Ok(Tensor::from_fn(n, 3, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = *d[k].get(&[i, j]);
        for l in 0..n {
            acc -= lc.get(&[l, k, i]) * gv.get(&[l, j]) + lc.get(&[l, k, j]) * gv.get(&[i, l]);
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::chart::standard_structure;
    use crate::expr::{Jet, JetSpace};

    #[test]
    fn flat_metric_has_parallel_structure() {
        let sp = JetSpace::new(4, 1).unwrap();
        let g = JetTensor::from_matrix(&sp, 1, &DMatrix::identity(4, 4));
        let j = JetTensor::from_matrix(&sp, 1, &standard_structure(&[1.0, -1.0]));
        let h = Tensor::zeros(4, 3);
        for s in [1.0, -1.0] {
            assert_eq!(covariant_deriv_j(&g, &h, &j, s, 0.5).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn levi_civita_is_metric_compatible() {
        let sp = JetSpace::new(2, 1).unwrap();
        let x = Jet::coordinates(&sp, 1, &[0.3, -0.2]);
        let g = JetTensor::from_fn(2, 2, |i| match (i[0], i[1]) {
            (0, 0) => (&x[0] * &x[0]).add_scalar(2.0),
            (1, 1) => x[1].exp(),
            _ => x[0].scale(0.1),
        });
        assert!(metric_compatibility(&g).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn singular_metric_reports_condition() {
        let sp = JetSpace::new(2, 1).unwrap();
        let g = JetTensor::from_matrix(&sp, 1, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert!(matches!(christoffel(&g), Err(GkError::Degenerate { .. })));
    }
}
