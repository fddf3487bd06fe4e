//! Real forms assembled from complex coefficient jets and complex covectors.

use std::sync::Arc;

use num_complex::Complex64;

use crate::charts::{multi_indices, permutations, JetTensor};
use crate::expr::{CJet, Jet, JetSpace};

/// `Re Σ c · u` (or `Im` when `imag`).
pub fn one_form(
    space: &Arc<JetSpace>,
    order: usize,
    n: usize,
    terms: &[(CJet, Vec<Complex64>)],
    imag: bool,
) -> JetTensor {
    let mut e: Vec<Jet> = (0..n).map(|_| Jet::zero(space, order)).collect();
    for (c, u) in terms {
        for (i, ui) in u.iter().enumerate() {
            if *ui == Complex64::new(0.0, 0.0) {
                continue;
            }
            if imag {
                e[i].axpy(ui.im, &c.re);
                e[i].axpy(ui.re, &c.im);
            } else {
                e[i].axpy(ui.re, &c.re);
                e[i].axpy(-ui.im, &c.im);
            }
        }
    }
    let mut it = e.into_iter();
    JetTensor::from_fn(n, 1, |_| it.next().expect("n components"))
}

/// `Re Σ c · (u₁ ∧ … ∧ u_k)`, `(dx ∧ dy)_{xy} = 1`.
pub fn real_form(
    space: &Arc<JetSpace>,
    order: usize,
    n: usize,
    terms: &[(CJet, Vec<Vec<Complex64>>)],
) -> JetTensor {
    let k = terms.first().map(|t| t.1.len()).unwrap_or(2);
    let perms = permutations(k);
    let idxs: Vec<Vec<usize>> = multi_indices(n, k).collect();
    let mut e: Vec<Jet> = (0..idxs.len()).map(|_| Jet::zero(space, order)).collect();
    for (c, us) in terms {
        for (slot, idx) in idxs.iter().enumerate() {
            let w: Complex64 = perms
                .iter()
                .map(|(p, s)| {
                    let prod: Complex64 = p.iter().enumerate().map(|(a, &b)| us[b][idx[a]]).product();
                    prod * *s
                })
                .sum();
            if w.norm() == 0.0 {
                continue;
            }
            e[slot].axpy(w.re, &c.re);
            e[slot].axpy(-w.im, &c.im);
        }
    }
    let mut it = e.into_iter();
    JetTensor::from_fn(n, k, |_| it.next().expect("shape"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_dz_wedge_dzbar_is_twice_area() {
        let sp = JetSpace::new(2, 0).unwrap();
        let one = CJet {
            re: Jet::zero(&sp, 0),
            im: Jet::constant(&sp, 0, 1.0),
        };
        let dz = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let dzb = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
        let w = real_form(&sp, 0, 2, &[(one, vec![dz.clone(), dzb])]).value();
        assert_eq!(*w.get(&[0, 1]), 2.0);
        assert_eq!(*w.get(&[1, 0]), -2.0);
        let c = CJet::real(Jet::constant(&sp, 0, 3.0));
        let a = one_form(&sp, 0, 2, &[(c, dz)], true).value();
        assert_eq!(a.data(), &[0.0, 3.0]);
    }
}
