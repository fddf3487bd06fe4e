//! Complex jets and Wirtinger derivatives.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::jet::Jet;
use crate::error::{GkError, Result};

/// A complex-valued jet `re + i·im`.
#[derive(Clone, Debug)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn real(re: Jet) -> CJet {
        let im = Jet::zero(re.space(), re.order());
        CJet { re, im }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn order(&self) -> usize {
        self.re.order().min(self.im.order())
    }

    pub fn conj(&self) -> CJet {
        CJet {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn scale(&self, s: Complex64) -> CJet {
        CJet {
            re: &self.re.scale(s.re) - &self.im.scale(s.im),
            im: &self.re.scale(s.im) + &self.im.scale(s.re),
        }
    }

    pub fn truncate(&self, order: usize) -> CJet {
        CJet {
            re: self.re.truncate(order),
            im: self.im.truncate(order),
        }
    }

    /// Real partial derivative along variable `v`.
    pub fn derivative(&self, v: usize) -> Result<CJet> {
        Ok(CJet {
            re: self.re.derivative(v)?,
            im: self.im.derivative(v)?,
        })
    }

    pub fn exp(&self) -> CJet {
        let e = self.re.exp();
        CJet {
            re: &e * &self.im.cos(),
            im: &e * &self.im.sin(),
        }
    }
}

impl Add for &CJet {
    type Output = CJet;
    fn add(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &CJet {
    type Output = CJet;
    fn sub(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &CJet {
    type Output = CJet;
    fn mul(self, rhs: &CJet) -> CJet {
        CJet {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }
}

impl Neg for &CJet {
    type Output = CJet;
    fn neg(self) -> CJet {
        CJet {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

/// One Wirtinger direction: `∂/∂w` (`conj = false`) or `∂/∂w̄` for the
/// complex pair `pair`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub pair: usize,
    pub conj: bool,
}

impl Slot {
    pub fn holo(pair: usize) -> Slot {
        Slot { pair, conj: false }
    }

    pub fn anti(pair: usize) -> Slot {
        Slot { pair, conj: true }
    }
}

/// `∂f/∂w` or `∂f/∂w̄` with `w = x + i·y`, `(x, y)` = real variable indices.
pub fn wirtinger_derivative(f: &CJet, x: usize, y: usize, conj: bool) -> Result<CJet> {
    let fx = f.derivative(x)?;
    let fy = f.derivative(y)?;
    // ∂w = ½(∂x − i∂y), ∂w̄ = ½(∂x + i∂y)
    let (re, im) = if conj {
        (&fx.re - &fy.im, &fx.im + &fy.re)
    } else {
        (&fx.re + &fy.im, &fx.im - &fy.re)
    };
    Ok(CJet {
        re: re.scale(0.5),
        im: im.scale(0.5),
    })
}

/// Applies a sequence of Wirtinger derivatives.
pub fn wirtinger_chain(f: &CJet, pairs: &[(usize, usize)], slots: &[Slot]) -> Result<CJet> {
    let mut g = f.clone();
    for s in slots {
        let (x, y) = pairs[s.pair];
        g = wirtinger_derivative(&g, x, y, s.conj)?;
    }
    Ok(g)
}

/// All complex partials of a jet up to its order, at the base point.
#[derive(Clone, Debug)]
pub struct WirtingerTable {
    order: usize,
    pairs: Vec<(usize, usize)>,
    values: BTreeMap<Vec<Slot>, Complex64>,
}

impl WirtingerTable {
    /// Builds the table for a real jet; `pairs[k] = (re_var, im_var)`.
    pub fn new(jet: &Jet, pairs: &[(usize, usize)]) -> WirtingerTable {
        Self::from_complex(&CJet::real(jet.clone()), pairs)
    }

    pub fn from_complex(f: &CJet, pairs: &[(usize, usize)]) -> WirtingerTable {
        let mut values = BTreeMap::new();
        let mut all_slots = Vec::new();
        for p in 0..pairs.len() {
            all_slots.push(Slot::holo(p));
            all_slots.push(Slot::anti(p));
        }
        fn walk(
            f: &CJet,
            from: usize,
            prefix: &mut Vec<Slot>,
            slots: &[Slot],
            pairs: &[(usize, usize)],
            out: &mut BTreeMap<Vec<Slot>, Complex64>,
        ) {
            out.insert(prefix.clone(), f.value());
            if f.order() == 0 {
                return;
            }
            for (k, s) in slots.iter().enumerate().skip(from) {
                let (x, y) = pairs[s.pair];
                let g = wirtinger_derivative(f, x, y, s.conj).expect("order checked above");
                prefix.push(*s);
                walk(&g, k, prefix, slots, pairs, out);
                prefix.pop();
            }
        }
        walk(f, 0, &mut Vec::new(), &all_slots, pairs, &mut values);
        WirtingerTable {
            order: f.order(),
            pairs: pairs.to_vec(),
            values,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Complex partial for the given multiset of directions (order-free).
    pub fn get(&self, slots: &[Slot]) -> Result<Complex64> {
        if slots.len() > self.order {
            return Err(GkError::OrderExceeded {
                needed: slots.len(),
                available: self.order,
            });
        }
        let mut key = slots.to_vec();
        key.sort();
        self.values
            .get(&key)
            .copied()
            .ok_or_else(|| GkError::Precondition(format!("no Wirtinger slot {key:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse, CoordSpec};
    use super::*;

    fn z() -> Vec<CoordSpec> {
        vec![CoordSpec::with_aliases("z", "x", "y")]
    }

    #[test]
    fn dz_of_abs2_is_conjugate() {
        let j = parse("abs2(z)", &z()).unwrap().eval_jet(&[1.0, 1.0], 2).unwrap();
        let t = WirtingerTable::new(&j, &[(0, 1)]);
        let d = t.get(&[Slot::holo(0)]).unwrap();
        assert!((d - Complex64::new(1.0, -1.0)).norm() < 1e-15);
        assert!((t.get(&[Slot::holo(0), Slot::anti(0)]).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn dz_of_real_part_is_half() {
        let j = parse("x", &z()).unwrap().eval_jet(&[0.2, 0.1], 1).unwrap();
        let t = WirtingerTable::new(&j, &[(0, 1)]);
        assert!((t.get(&[Slot::holo(0)]).unwrap() - 0.5).norm() < 1e-15);
        assert!((t.get(&[Slot::anti(0)]).unwrap() - 0.5).norm() < 1e-15);
    }

    #[test]
    fn fubini_study_hessian() {
        let j = parse("log(1 + abs2(z))", &z())
            .unwrap()
            .eval_jet(&[0.5, 0.0], 2)
            .unwrap();
        let t = WirtingerTable::new(&j, &[(0, 1)]);
        let h = t.get(&[Slot::anti(0), Slot::holo(0)]).unwrap();
        let oracle = 1.0 / (1.25f64 * 1.25);
        assert!((h.re - oracle).abs() < 1e-14 && h.im.abs() < 1e-15);
    }

    #[test]
    fn order_exceeded() {
        let j = parse("abs2(z)", &z()).unwrap().eval_jet(&[0.0, 0.0], 1).unwrap();
        let t = WirtingerTable::new(&j, &[(0, 1)]);
        assert!(matches!(
            t.get(&[Slot::holo(0), Slot::anti(0)]),
            Err(GkError::OrderExceeded { .. })
        ));
    }
}
