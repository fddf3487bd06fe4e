//! Exterior calculus on chart-local forms.
//!
//! A `k`-form is a totally antisymmetric rank-`k` covariant tensor with the
//! convention `(dx ∧ dy)_{xy} = 1`. A complex structure acts on forms by
//! `(J·α)(X₁, …) = α(JX₁, …)`, which multiplies a `(p,q)`-form by `i^{p−q}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::tensor::{max_abs, multi_indices, JetTensor, Tensor};
use crate::error::{GkError, Result};

/// `(dα)_{i₀…i_k} = Σ_j (−1)^j ∂_{i_j} α_{i₀…î_j…i_k}`, as jets one order lower.
pub fn exterior_d(form: &JetTensor) -> Result<JetTensor> {
    let n = form.dim();
    let k = form.rank();
    if k > 3 {
        return Err(GkError::Precondition(format!(
            "exterior derivative supports forms of degree ≤ 3, got {k}"
        )));
    }
    if form.order() == 0 {
        return Err(GkError::OrderExceeded {
            needed: 1,
            available: 0,
        });
    }
    let grads: Vec<JetTensor> = (0..n)
        .map(|v| form.derivative(v))
        .collect::<Result<_>>()?;
    Ok(JetTensor::from_fn(n, k + 1, |idx| {
        let mut rest = Vec::with_capacity(k);
        let mut acc = None;
        for j in 0..=k {
            rest.clear();
            rest.extend(idx.iter().enumerate().filter(|(s, _)| *s != j).map(|(_, &i)| i));
            let term = grads[idx[j]].get(&rest);
            acc = Some(match acc {
                None if j % 2 == 0 => term.clone(),
                None => -term,
                Some(a) if j % 2 == 0 => &a + term,
                Some(a) => &a - term,
            });
        }
        acc.expect("at least one term")
    }))
}

/// `dᶜ = J⁻¹ d J` on forms of any degree: `dᶜα = (−1)^{k+1} J·d(J·α)`.
///
/// Agrees with `i(∂̄ − ∂)` for integrable `J`.
pub fn dc_jets(form: &JetTensor, j: &JetTensor) -> Result<JetTensor> {
    let k = form.rank();
    let ja = form.pull_slots(j);
    let d = exterior_d(&ja)?;
    let jd = d.pull_slots(&j.truncate(d.order()));
    Ok(if k % 2 == 1 { jd } else { jd.scale(-1.0) })
}

/// Residual of `J² = −I`, relative to `max(1, |J|²)`.
pub fn square_residual(j: &DMatrix<f64>) -> f64 {
    let n = j.nrows();
    let sq = j * j + DMatrix::identity(n, n);
    max_abs(&sq) / max_abs(j).powi(2).max(1.0)
}

fn validate_structure(j: &DMatrix<f64>) -> Result<()> {
    let r = square_residual(j);
    if !(r <= 1e-9) {
        return Err(GkError::InvalidStructure {
            what: "J² ≠ −I".into(),
            residual: r,
        });
    }
    Ok(())
}

/// Slot-wise projectors `P¹⁰ = ½(I − iJ)` and `P⁰¹ = ½(I + iJ)`.
pub fn projectors(j: &DMatrix<f64>) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = j.nrows();
    let half = Complex64::new(0.5, 0.0);
    let ihalf = Complex64::new(0.0, 0.5);
    let p10 = DMatrix::from_fn(n, n, |a, b| {
        let id = if a == b { half } else { Complex64::new(0.0, 0.0) };
        id - ihalf * j[(a, b)]
    });
    let p01 = DMatrix::from_fn(n, n, |a, b| {
        let id = if a == b { half } else { Complex64::new(0.0, 0.0) };
        id + ihalf * j[(a, b)]
    });
    (p10, p01)
}

fn contract_slot(t: &Tensor<Complex64>, slot: usize, m: &DMatrix<Complex64>) -> Tensor<Complex64> {
    let n = t.dim();
    Tensor::from_fn(n, t.rank(), |idx| {
        let mut k = idx.to_vec();
        let i = idx[slot];
        (0..n)
            .map(|a| {
                k[slot] = a;
                m[(a, i)] * t.get(&k)
            })
            .sum()
    })
}

/// The `(p, q)` component of a real form with respect to `J`.
pub fn bidegree_project(form: &Tensor, j: &DMatrix<f64>, p: usize, q: usize) -> Result<Tensor<Complex64>> {
    validate_structure(j)?;
    let k = form.rank();
    if p + q != k {
        return Err(GkError::Precondition(format!(
            "bidegree ({p},{q}) does not match form degree {k}"
        )));
    }
    let (p10, p01) = projectors(j);
    let base = form.complexify();
    let mut out = Tensor::<Complex64>::zeros(form.dim(), k);
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize != p {
            continue;
        }
        let mut t = base.clone();
        for slot in 0..k {
            let m = if mask & (1 << slot) != 0 { &p10 } else { &p01 };
            t = contract_slot(&t, slot, m);
        }
        for idx in multi_indices(form.dim(), k) {
            *out.get_mut(&idx) += t.get(&idx);
        }
    }
    Ok(out)
}

/// Splits a form into all its `(p, q)` parts, `p = 0..=k`.
pub fn bidegree_parts(form: &Tensor, j: &DMatrix<f64>) -> Result<Vec<Tensor<Complex64>>> {
    (0..=form.rank())
        .map(|p| bidegree_project(form, j, p, form.rank() - p))
        .collect()
}

fn argmax_component(t: &Tensor<Complex64>) -> (Vec<usize>, f64) {
    multi_indices(t.dim(), t.rank())
        .map(|idx| {
            let v = t.get(&idx).norm();
            (idx, v)
        })
        .fold((vec![], -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// `dᶜω = i((1,2) − (2,1))` of `dω`, for a `(1,1)`-form `ω`.
///
/// `omega` and `domega` are values at one point. The result is checked to be
/// real and the bidegree parts are checked to reconstruct `dω`.
pub fn dc_project(omega: &Tensor, domega: &Tensor, j: &DMatrix<f64>) -> Result<Tensor> {
    let scale = omega.max_abs().max(1.0);
    let w = bidegree_parts(omega, j)?;
    let off = Tensor::from_fn(omega.dim(), 2, |i| w[0].get(i) + w[2].get(i));
    let (component, residual) = argmax_component(&off);
    if residual > 1e-8 * scale {
        return Err(GkError::NotType11 {
            component,
            residual,
        });
    }
    let parts = bidegree_parts(domega, j)?;
    let mut sum = Tensor::<Complex64>::zeros(domega.dim(), 3);
    for part in &parts {
        for idx in multi_indices(domega.dim(), 3) {
            *sum.get_mut(&idx) += part.get(&idx);
        }
    }
    let recon = sum.re().dist(domega).max(sum.im().max_abs());
    let dscale = domega.max_abs().max(1.0);
    if recon > 1e-10 * dscale {
        return Err(GkError::Convention {
            what: "bidegree parts do not sum to dω".into(),
            residual: recon,
        });
    }
    let i = Complex64::i();
    let out = Tensor::from_fn(domega.dim(), 3, |idx| {
        i * (parts[1].get(idx) - parts[2].get(idx))
    });
    let imag = out.im().max_abs();
    if imag > 1e-10 * dscale {
        return Err(GkError::Convention {
            what: "dᶜω has an imaginary part".into(),
            residual: imag,
        });
    }
    Ok(out.re())
}

/// `v₁ ∧ … ∧ v_k` of complex covectors, `(dx ∧ dy)_{xy} = 1`.
pub fn wedge(vs: &[&[Complex64]]) -> Tensor<Complex64> {
    let k = vs.len();
    let n = vs[0].len();
    let perms = permutations(k);
    Tensor::from_fn(n, k, |idx| {
        perms
            .iter()
            .map(|(perm, sign)| {
                let prod: Complex64 = perm
                    .iter()
                    .enumerate()
                    .map(|(s, &p)| vs[p][idx[s]])
                    .product();
                prod * *sign
            })
            .sum()
    })
}

/// All permutations of `0..k` with their signs.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, f64)>) {
        let k = used.len();
        if cur.len() == k {
            let mut inv = 0;
            for a in 0..k {
                for b in a + 1..k {
                    if cur[a] > cur[b] {
                        inv += 1;
                    }
                }
            }
            out.push((cur.clone(), if inv % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}
