//! Schouten bracket of bivectors and Nijenhuis torsion of endomorphisms.

use super::forms::square_residual;
use super::tensor::{JetTensor, Tensor};
use crate::error::{GkError, Result};

/// `[a,b]^{ijk} = T^{ijk} + T^{jki} + T^{kij}` with
/// `T^{ijk} = a^{il} ∂_l b^{jk} + b^{il} ∂_l a^{jk}`.
///
/// Both arguments are bivector jets of order ≥ 1; the result is a value.
pub fn schouten(a: &JetTensor, b: &JetTensor) -> Result<Tensor> {
    let n = a.dim();
    let av = a.value();
    let bv = b.value();
    let da = a.gradient_values()?;
    let db = b.gradient_values()?;
    let t = Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        (0..n)
            .map(|l| av.get(&[i, l]) * db[l].get(&[j, k]) + bv.get(&[i, l]) * da[l].get(&[j, k]))
            .sum::<f64>()
    });
    Ok(Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        t.get(&[i, j, k]) + t.get(&[j, k, i]) + t.get(&[k, i, j])
    }))
}

/// Nijenhuis torsion of an arbitrary endomorphism field `A`:
/// `N(X,Y) = [AX,AY] − A[AX,Y] − A[X,AY] + A²[X,Y]` on coordinate fields,
/// returned as `N^i_{jk}` (slot order `i, j, k`).
pub fn nijenhuis_torsion(a: &JetTensor) -> Result<Tensor> {
    let n = a.dim();
    let av = a.value();
    let d = a.gradient_values()?;
    Ok(Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        (0..n)
            .map(|l| {
                av.get(&[l, j]) * d[l].get(&[i, k]) - av.get(&[l, k]) * d[l].get(&[i, j])
                    - av.get(&[i, l]) * d[j].get(&[l, k])
                    + av.get(&[i, l]) * d[k].get(&[l, j])
            })
            .sum::<f64>()
    }))
}

/// Nijenhuis tensor of an almost complex structure; rejects `J² ≠ −I`.
pub fn nijenhuis(j: &JetTensor) -> Result<Tensor> {
    let r = square_residual(&j.matrix());
    if !(r <= 1e-9) {
        return Err(GkError::InvalidStructure {
            what: "J² ≠ −I".into(),
            residual: r,
        });
    }
    nijenhuis_torsion(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::chart::standard_structure;
    use crate::expr::{Jet, JetSpace};

    #[test]
    fn constant_bivector_bracket_vanishes() {
        let sp = JetSpace::new(4, 1).unwrap();
        let j = standard_structure(&[1.0, 1.0]);
        let pi = JetTensor::from_matrix(&sp, 1, &j);
        assert_eq!(schouten(&pi, &pi).unwrap().max_abs(), 0.0);
        assert_eq!(nijenhuis(&pi).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn non_integrable_structure_has_torsion() {
        // J = S J₀ S⁻¹ with the shear S ∂0 = ∂0 + x2 ∂2, which is not a Jacobian
        let sp = JetSpace::new(4, 1).unwrap();
        let f = Jet::variable(&sp, 1, 2, 0.2);
        let one = Jet::constant(&sp, 1, 1.0);
        let zero = Jet::zero(&sp, 1);
        let m = |i: usize, jj: usize| -> Jet {
            match (i, jj) {
                (1, 0) | (3, 2) => one.clone(),
                (0, 1) | (2, 3) => -&one,
                (3, 0) | (2, 1) => -&f,
                _ => zero.clone(),
            }
        };
        let jt = JetTensor::from_fn(4, 2, |i| m(i[0], i[1]));
        let mv = jt.matrix();
        assert!(square_residual(&mv) < 1e-15);
        let n = nijenhuis(&jt).unwrap();
        assert!(n.max_abs() > 1e-3);
    }

    #[test]
    fn bracket_is_symmetric_in_its_arguments() {
        let sp = JetSpace::new(3, 1).unwrap();
        let xs = Jet::coordinates(&sp, 1, &[0.1, 0.2, 0.3]);
        let mk = |f: &dyn Fn(usize) -> Jet| {
            JetTensor::from_fn(3, 2, |i| {
                let (a, b) = (i[0], i[1]);
                if a == b {
                    Jet::zero(&sp, 1)
                } else if a < b {
                    f(a + b)
                } else {
                    -&f(a + b)
                }
            })
        };
        let a = mk(&|k| &xs[k % 3] * &xs[(k + 1) % 3]);
        let b = mk(&|k| xs[(k + 2) % 3].sin());
        let ab = schouten(&a, &b).unwrap();
        let ba = schouten(&b, &a).unwrap();
        assert!(ab.dist(&ba) < 1e-15);
    }
}
