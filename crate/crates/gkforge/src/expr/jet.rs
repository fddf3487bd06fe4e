//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a function
//! at a base point, for every multi-index `α` of total degree up to the jet's
//! order. Coefficients are laid out densely in graded order, so a jet of lower
//! order is a prefix of the same jet at higher order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{GkError, Result};

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 4;

/// Shared multi-index bookkeeping for jets in `nvars` variables.
pub struct JetSpace {
    nvars: usize,
    max_order: usize,
    exps: Vec<Vec<u8>>,
    deg_end: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    mul: Vec<(u32, u32, u32)>,
    mul_end: Vec<usize>,
    shift: Vec<Vec<u32>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("max_order", &self.max_order)
            .finish()
    }
}

fn push_degree(n: usize, d: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() == n - 1 {
        prefix.push(d as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in (0..=d).rev() {
        prefix.push(k as u8);
        push_degree(n, d - k, prefix, out);
        prefix.pop();
    }
}

impl JetSpace {
    pub fn new(nvars: usize, max_order: usize) -> Result<Arc<Self>> {
        if max_order > MAX_ORDER {
            return Err(GkError::OrderExceeded {
                needed: max_order,
                available: MAX_ORDER,
            });
        }
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut deg_end = Vec::with_capacity(max_order + 1);
        for d in 0..=max_order {
            if nvars == 0 {
                if d == 0 {
                    exps.push(Vec::new());
                }
            } else {
                push_degree(nvars, d, &mut Vec::new(), &mut exps);
            }
            deg_end.push(exps.len());
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            let da = degree(a);
            for (j, b) in exps.iter().enumerate() {
                if da + degree(b) > max_order {
                    continue;
                }
                let s: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul.push((i as u32, j as u32, index[&s] as u32));
            }
        }
        mul.sort_by_key(|&(i, j, k)| (degree(&exps[k as usize]), k, i, j));
        let mut mul_end = vec![0; max_order + 1];
        for (d, end) in mul_end.iter_mut().enumerate() {
            *end = mul
                .iter()
                .take_while(|&&(_, _, k)| degree(&exps[k as usize]) <= d)
                .count();
        }

        let below = if max_order == 0 { 0 } else { deg_end[max_order - 1] };
        let shift = (0..nvars)
            .map(|v| {
                (0..below)
                    .map(|a| {
                        let mut e = exps[a].clone();
                        e[v] += 1;
                        index[&e] as u32
                    })
                    .collect()
            })
            .collect();

        Ok(Arc::new(JetSpace {
            nvars,
            max_order,
            exps,
            deg_end,
            index,
            mul,
            mul_end,
            shift,
        }))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of coefficients of a jet of the given order.
    pub fn len(&self, order: usize) -> usize {
        self.deg_end[order]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Multi-index of coefficient slot `i`.
    pub fn exponent(&self, i: usize) -> &[u8] {
        &self.exps[i]
    }

    /// Slot of multi-index `e`, if within the space.
    pub fn slot(&self, e: &[u8]) -> Option<usize> {
        self.index.get(e).copied()
    }
}

/// A truncated Taylor expansion at a base point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("c", &self.c)
            .finish()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, order: usize, value: f64) -> Jet {
        let mut c = vec![0.0; space.len(order)];
        c[0] = value;
        Jet {
            space: space.clone(),
            order,
            c,
        }
    }

    pub fn zero(space: &Arc<JetSpace>, order: usize) -> Jet {
        Jet::constant(space, order, 0.0)
    }

    /// The coordinate function `x_v` expanded at `x_v = value`.
    pub fn variable(space: &Arc<JetSpace>, order: usize, v: usize, value: f64) -> Jet {
        let mut j = Jet::constant(space, order, value);
        if order >= 1 {
            let mut e = vec![0u8; space.nvars];
            e[v] = 1;
            j.c[space.index[&e]] = 1.0;
        }
        j
    }

    /// Identity jets of all coordinates at `point`.
    pub fn coordinates(space: &Arc<JetSpace>, order: usize, point: &[f64]) -> Vec<Jet> {
        point
            .iter()
            .enumerate()
            .map(|(v, &x)| Jet::variable(space, order, v, x))
            .collect()
    }

    pub fn from_coeffs(space: &Arc<JetSpace>, order: usize, c: Vec<f64>) -> Result<Jet> {
        if c.len() != space.len(order) {
            return Err(GkError::Dimension {
                expected: space.len(order),
                got: c.len(),
            });
        }
        Ok(Jet {
            space: space.clone(),
            order,
            c,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Taylor coefficient for multi-index `e` (zero if above the order).
    pub fn coeff(&self, e: &[u8]) -> f64 {
        match self.space.slot(e) {
            Some(i) if i < self.c.len() => self.c[i],
            _ => 0.0,
        }
    }

    /// Partial derivative `∂^e f` at the base point.
    pub fn partial(&self, e: &[u8]) -> Result<f64> {
        let d: usize = e.iter().map(|&x| x as usize).sum();
        if d > self.order {
            return Err(GkError::OrderExceeded {
                needed: d,
                available: self.order,
            });
        }
        let scale: f64 = e.iter().map(|&k| factorial(k as usize)).product();
        Ok(self.coeff(e) * scale)
    }

    /// First partials `∂_v f`.
    pub fn gradient(&self) -> Result<Vec<f64>> {
        (0..self.nvars())
            .map(|v| {
                let mut e = vec![0u8; self.nvars()];
                e[v] = 1;
                self.partial(&e)
            })
            .collect()
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet {
            space: self.space.clone(),
            order,
            c: self.c[..self.space.len(order)].to_vec(),
        }
    }

    /// `∂f/∂x_v` as a jet of one lower order.
    pub fn derivative(&self, v: usize) -> Result<Jet> {
        if self.order == 0 {
            return Err(GkError::OrderExceeded {
                needed: 1,
                available: 0,
            });
        }
        let o = self.order - 1;
        let sh = &self.space.shift[v];
        let c = (0..self.space.len(o))
            .map(|a| (self.space.exps[a][v] as f64 + 1.0) * self.c[sh[a] as usize])
            .collect();
        Ok(Jet {
            space: self.space.clone(),
            order: o,
            c,
        })
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            order: self.order,
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    /// `self += s * other`, truncating to the lower order.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        if other.order < self.order {
            *self = self.truncate(other.order);
        }
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += s * b;
        }
    }

    fn binary(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let order = self.order.min(other.order);
        let n = self.space.len(order);
        Jet {
            space: self.space.clone(),
            order,
            c: (0..n).map(|i| f(self.c[i], other.c[i])).collect(),
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let sp = &self.space;
        let mut c = vec![0.0; sp.len(order)];
        for &(i, j, k) in &sp.mul[..sp.mul_end[order]] {
            c[k as usize] += self.c[i as usize] * other.c[j as usize];
        }
        Jet {
            space: sp.clone(),
            order,
            c,
        }
    }

    /// Evaluates `Σ a_k (self − value)^k`, i.e. composes a univariate Taylor
    /// series (coefficients about `self.value()`) with this jet.
    pub fn compose(&self, a: &[f64]) -> Jet {
        let mut h = self.clone();
        h.c[0] = 0.0;
        let o = self.order.min(a.len().saturating_sub(1));
        let mut acc = Jet::constant(&self.space, self.order, a[o]);
        for k in (0..o).rev() {
            acc = acc.product(&h);
            acc.c[0] += a[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        let x = self.value();
        if x == 0.0 || !x.is_finite() {
            return Err(domain("recip", "division by zero"));
        }
        let a: Vec<f64> = (0..=self.order)
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s / x.powi(k as i32 + 1)
            })
            .collect();
        Ok(self.compose(&a))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let a: Vec<f64> = (0..=self.order).map(|k| e / factorial(k)).collect();
        self.compose(&a)
    }

    pub fn ln(&self) -> Result<Jet> {
        let x = self.value();
        if x <= 0.0 || !x.is_finite() {
            return Err(domain("log", "argument is not positive"));
        }
        let mut a = vec![x.ln()];
        for k in 1..=self.order {
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            a.push(s / (k as f64 * x.powi(k as i32)));
        }
        Ok(self.compose(&a))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let x = self.value();
        if x <= 0.0 || !x.is_finite() {
            return Err(domain("sqrt", "argument is not positive"));
        }
        let mut a = Vec::new();
        let mut binom = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                binom *= (0.5 - (k as f64 - 1.0)) / k as f64;
            }
            a.push(binom * x.powf(0.5 - k as f64));
        }
        Ok(self.compose(&a))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let a: Vec<f64> = (0..=self.order)
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&a)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let a: Vec<f64> = (0..=self.order)
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&a)
    }

    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(&self.space, self.order, 1.0);
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                result = result.product(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.product(&base);
            }
        }
        Ok(result)
    }

    /// Angle of the point `(x, y)`, with `self` playing `y`.
    pub fn atan2(&self, x: &Jet) -> Result<Jet> {
        let (y0, x0) = (self.value(), x.value());
        if y0 == 0.0 && x0 == 0.0 {
            return Err(domain("atan2", "angle undefined at the origin"));
        }
        let order = self.order.min(x.order);
        // atan2(y,x) = atan(y/x) + const, or const − atan(x/y)
        let (u, sign) = if x0.abs() >= y0.abs() {
            (self.div(x)?, 1.0)
        } else {
            (x.div(self)?, -1.0)
        };
        let u0 = u.value();
        let inner = series_recip(&[1.0 + u0 * u0, 2.0 * u0, 1.0], order);
        let mut a = vec![y0.atan2(x0)];
        for k in 1..=order {
            a.push(sign * inner[k - 1] / k as f64);
        }
        Ok(u.truncate(order).compose(&a))
    }

    /// Substitutes jets for the variables of a polynomial given by this jet's
    /// coefficients: returns `Σ c_α Π (x_v − x_v(0))^α_v` with `x_v = inputs[v]`.
    ///
    /// The inputs may live in a different jet space; the result lives in theirs.
    pub fn substitute(&self, inputs: &[Jet]) -> Result<Jet> {
        if inputs.len() != self.nvars() {
            return Err(GkError::Dimension {
                expected: self.nvars(),
                got: inputs.len(),
            });
        }
        let Some(first) = inputs.first() else {
            return Ok(self.clone());
        };
        let order = inputs.iter().map(|j| j.order).min().unwrap_or(0);
        let target = first.space.clone();
        let deltas: Vec<Jet> = inputs
            .iter()
            .map(|j| {
                let mut d = j.truncate(order);
                d.c[0] = 0.0;
                d
            })
            .collect();
        let top = self.order.min(order);
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(deltas.len());
        for d in &deltas {
            let mut p = vec![Jet::constant(&target, order, 1.0)];
            for k in 1..=top {
                let next = p[k - 1].product(d);
                p.push(next);
            }
            powers.push(p);
        }
        let mut out = Jet::zero(&target, order);
        for slot in 0..self.space.len(top) {
            let ck = self.c[slot];
            if ck == 0.0 {
                continue;
            }
            let e = &self.space.exps[slot];
            let mut term: Option<Jet> = None;
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let p = &powers[v][k as usize];
                term = Some(match term {
                    None => p.clone(),
                    Some(t) => t.product(p),
                });
            }
            match term {
                None => out.c[0] += ck,
                Some(t) => out.axpy(ck, &t),
            }
        }
        Ok(out)
    }
}

fn domain(node: &str, message: &str) -> GkError {
    GkError::Domain {
        node: node.to_string(),
        message: message.to_string(),
    }
}

/// Reciprocal of a univariate truncated power series.
fn series_recip(a: &[f64], order: usize) -> Vec<f64> {
    let mut b = vec![0.0; order + 1];
    b[0] = 1.0 / a[0];
    for k in 1..=order {
        let mut s = 0.0;
        for j in 1..=k.min(a.len() - 1) {
            s += a[j] * b[k - j];
        }
        b[k] = -s / a[0];
    }
    b
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.binary(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.binary(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.product(&rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
