//! Dense chart-local tensors: plain values and jet-valued components.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{GkError, Result};
use crate::expr::{Jet, JetSpace};

/// Dense `n^rank` array in row-major index order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T = f64> {
    n: usize,
    rank: usize,
    data: Vec<T>,
}

fn flat(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Iterates all multi-indices of length `rank` over `0..n` in row-major order.
pub fn multi_indices(n: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(rank as u32);
    (0..total).map(move |mut f| {
        let mut idx = vec![0; rank];
        for slot in (0..rank).rev() {
            idx[slot] = f % n;
            f /= n;
        }
        idx
    })
}

impl<T: Clone + Default> Tensor<T> {
    pub fn zeros(n: usize, rank: usize) -> Self {
        Tensor {
            n,
            rank,
            data: vec![T::default(); n.pow(rank as u32)],
        }
    }

    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        Tensor {
            n,
            rank,
            data: multi_indices(n, rank).map(|i| f(&i)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[flat(self.n, idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut T {
        let n = self.n;
        &mut self.data[flat(n, idx)]
    }

    pub fn map<U: Clone + Default>(&self, f: impl Fn(&T) -> U) -> Tensor<U> {
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl Tensor<f64> {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Tensor::from_fn(m.nrows(), 2, |i| m[(i[0], i[1])])
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank, 2, "to_matrix needs a rank-2 tensor");
        DMatrix::from_fn(self.n, self.n, |i, j| self.data[i * self.n + j])
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Tensor {
        self.map(|x| x * s)
    }

    /// `max |self − other|`.
    pub fn dist(&self, other: &Tensor) -> f64 {
        self.sub(other).max_abs()
    }

    /// Largest deviation from total antisymmetry under transpositions of
    /// adjacent slots.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in multi_indices(self.n, self.rank) {
            for s in 0..self.rank.saturating_sub(1) {
                let mut sw = idx.clone();
                sw.swap(s, s + 1);
                worst = worst.max((self.get(&idx) + self.get(&sw)).abs());
            }
        }
        worst
    }

    /// Contracts every slot with a matrix: `out_{i..} = Σ M_{a i} … t_{a..}`.
    /// With `M = J` this is the action `(J·α)(X, …) = α(JX, …)` on forms.
    pub fn pull_slots(&self, m: &DMatrix<f64>) -> Tensor {
        let mut cur = self.clone();
        for slot in 0..self.rank {
            cur = Tensor::from_fn(self.n, self.rank, |idx| {
                let mut k = idx.to_vec();
                let i = idx[slot];
                (0..self.n)
                    .map(|a| {
                        k[slot] = a;
                        m[(a, i)] * cur.get(&k)
                    })
                    .sum()
            });
        }
        cur
    }

    pub fn complexify(&self) -> Tensor<Complex64> {
        self.map(|&x| Complex64::new(x, 0.0))
    }
}

impl Tensor<Complex64> {
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn re(&self) -> Tensor {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> Tensor {
        self.map(|z| z.im)
    }
}

/// A tensor whose components are jets.
#[derive(Clone, Debug)]
pub struct JetTensor {
    n: usize,
    rank: usize,
    e: Vec<Jet>,
}

impl JetTensor {
    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Jet) -> Self {
        JetTensor {
            n,
            rank,
            e: multi_indices(n, rank).map(|i| f(&i)).collect(),
        }
    }

    pub fn try_from_fn(
        n: usize,
        rank: usize,
        mut f: impl FnMut(&[usize]) -> Result<Jet>,
    ) -> Result<Self> {
        let e = multi_indices(n, rank)
            .map(|i| f(&i))
            .collect::<Result<Vec<_>>>()?;
        Ok(JetTensor { n, rank, e })
    }

    pub fn constant(space: &Arc<JetSpace>, order: usize, t: &Tensor) -> Self {
        JetTensor {
            n: t.n,
            rank: t.rank,
            e: t.data.iter().map(|&x| Jet::constant(space, order, x)).collect(),
        }
    }

    pub fn from_matrix(space: &Arc<JetSpace>, order: usize, m: &DMatrix<f64>) -> Self {
        Self::constant(space, order, &Tensor::from_matrix(m))
    }

    pub fn zeros(space: &Arc<JetSpace>, order: usize, n: usize, rank: usize) -> Self {
        JetTensor::from_fn(n, rank, |_| Jet::zero(space, order))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.e.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.e[0].space()
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.e[flat(self.n, idx)]
    }

    pub fn at(&self, i: usize, j: usize) -> &Jet {
        &self.e[i * self.n + j]
    }

    pub fn components(&self) -> &[Jet] {
        &self.e
    }

    pub fn value(&self) -> Tensor {
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.e.iter().map(Jet::value).collect(),
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.value().to_matrix()
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|j| j.truncate(order))
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        JetTensor {
            n: self.n,
            rank: self.rank,
            e: self.e.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &JetTensor, f: impl Fn(&Jet, &Jet) -> Jet) -> Self {
        assert_eq!((self.n, self.rank), (other.n, other.rank));
        JetTensor {
            n: self.n,
            rank: self.rank,
            e: self.e.iter().zip(&other.e).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &JetTensor) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &JetTensor) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a.scale(s))
    }

    /// Componentwise `∂_v`.
    pub fn derivative(&self, v: usize) -> Result<Self> {
        Ok(JetTensor {
            n: self.n,
            rank: self.rank,
            e: self
                .e
                .iter()
                .map(|j| j.derivative(v))
                .collect::<Result<_>>()?,
        })
    }

    /// `grad[v]` = componentwise `∂_v` evaluated at the base point.
    pub fn gradient_values(&self) -> Result<Vec<Tensor>> {
        (0..self.n).map(|v| Ok(self.derivative(v)?.value())).collect()
    }

    fn require_matrix(&self) {
        assert_eq!(self.rank, 2, "matrix operation on rank-{} tensor", self.rank);
    }

    pub fn transpose(&self) -> Self {
        self.require_matrix();
        JetTensor::from_fn(self.n, 2, |i| self.at(i[1], i[0]).clone())
    }

    pub fn matmul(&self, other: &JetTensor) -> Self {
        self.require_matrix();
        other.require_matrix();
        let n = self.n;
        JetTensor::from_fn(n, 2, |idx| {
            let (i, j) = (idx[0], idx[1]);
            let mut acc = self.at(i, 0) * other.at(0, j);
            for k in 1..n {
                acc = &acc + &(self.at(i, k) * other.at(k, j));
            }
            acc
        })
    }

    /// Matrix inverse by Gauss–Jordan elimination with partial pivoting on
    /// the base-point values.
    pub fn inverse(&self, what: &str) -> Result<Self> {
        self.require_matrix();
        let n = self.n;
        let cond = condition_number(&self.matrix());
        if !(cond < 1e13) {
            return Err(GkError::Degenerate {
                what: what.to_string(),
                condition: cond,
            });
        }
        let space = self.space().clone();
        let order = self.order();
        let mut a: Vec<Vec<Jet>> = (0..n)
            .map(|i| (0..n).map(|j| self.at(i, j).truncate(order)).collect())
            .collect();
        let mut b: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Jet::constant(&space, order, if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| {
                    a[x][c]
                        .value()
                        .abs()
                        .partial_cmp(&a[y][c].value().abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(c);
            a.swap(c, p);
            b.swap(c, p);
            let inv = a[c][c].recip().map_err(|_| GkError::Degenerate {
                what: what.to_string(),
                condition: f64::INFINITY,
            })?;
            for j in 0..n {
                a[c][j] = &a[c][j] * &inv;
                b[c][j] = &b[c][j] * &inv;
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = a[r][c].clone();
                if f.coeffs().iter().all(|&x| x == 0.0) {
                    continue;
                }
                for j in 0..n {
                    let ta = &f * &a[c][j];
                    a[r][j] = &a[r][j] - &ta;
                    let tb = &f * &b[c][j];
                    b[r][j] = &b[r][j] - &tb;
                }
            }
        }
        Ok(JetTensor {
            n,
            rank: 2,
            e: b.into_iter().flatten().collect(),
        })
    }

    /// Jet version of [`Tensor::pull_slots`].
    pub fn pull_slots(&self, m: &JetTensor) -> Self {
        m.require_matrix();
        let mut cur = self.clone();
        for slot in 0..self.rank {
            let prev = cur.clone();
            cur = JetTensor::from_fn(self.n, self.rank, |idx| {
                let mut k = idx.to_vec();
                let i = idx[slot];
                k[slot] = 0;
                let mut acc = m.at(0, i) * prev.get(&k);
                for a in 1..self.n {
                    k[slot] = a;
                    acc = &acc + &(m.at(a, i) * prev.get(&k));
                }
                acc
            });
        }
        cur
    }
}

/// 2-norm condition number; infinite for singular matrices.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Largest absolute matrix entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}
