//! Polarization change on the leaf block: `K̃(q, P̃) = K(q, P) − 2 Re Σ P_a P̃_a`
//! at the stationary point `∂K/∂P_a = P̃_a` for the swapped pairs.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::polar::leaf_pairs;
use super::scenario::{Case, Potential, PotentialScenario};
use crate::charts::{condition_number, Chart};
use crate::error::{GkError, Result};
use crate::expr::{wirtinger_chain, CJet, Jet, JetSpace, Slot};

/// Stationarity tolerance of the inner solve.
pub const NEWTON_TOL: f64 = 1e-12;
/// Iteration cap of the inner solve.
pub const NEWTON_MAX_ITER: usize = 50;

/// `K̃` as a potential in the new coordinates `(q, P̃)`.
pub struct LegendrePotential {
    base: Arc<dyn Potential>,
    chart: Arc<Chart>,
    /// Complex coordinate indices of the swapped `P` slots.
    slots: Vec<usize>,
}

impl fmt::Debug for LegendrePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LegendrePotential")
            .field("base", &self.base)
            .field("slots", &self.slots)
            .finish()
    }
}

impl LegendrePotential {
    fn block_name(&self) -> String {
        let names: Vec<&str> = self.slots.iter().map(|&c| self.chart.coords()[c].name.as_str()).collect();
        format!("d2K/dP dP over swapped pairs [{}]", names.join(", "))
    }

    /// `∂K/∂P_a` at `x` with its real Jacobian in the swapped real variables.
    fn residual(&self, x: &[f64]) -> Result<(Vec<CJet>, DMatrix<f64>)> {
        let n = self.chart.real_dim();
        let space = JetSpace::new(n, 2)?;
        let k = CJet::real(self.base.jet(&space, x, 2)?);
        let pairs = self.chart.pairs();
        let m = self.slots.len();
        let mut kp = Vec::with_capacity(m);
        let mut jac = DMatrix::zeros(2 * m, 2 * m);
        for (i, &a) in self.slots.iter().enumerate() {
            let f = wirtinger_chain(&k, &pairs, &[Slot::holo(a)])?;
            for (j, &b) in self.slots.iter().enumerate() {
                for s in 0..2 {
                    jac[(2 * i, 2 * j + s)] = f.re.derivative(2 * b + s)?.value();
                    jac[(2 * i + 1, 2 * j + s)] = f.im.derivative(2 * b + s)?.value();
                }
            }
            kp.push(f);
        }
        Ok((kp, jac))
    }

    /// Solves `∂K/∂P_a(q, P) = P̃_a` for the swapped `P` by damped Newton.
    /// Returns the old-coordinate point and the final Jacobian.
    pub fn solve(&self, y: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let target: Vec<f64> = self.slots.iter().flat_map(|&a| [y[2 * a], y[2 * a + 1]]).collect();
        let scale = target.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let eval = |x: &[f64]| -> Result<(DVector<f64>, DMatrix<f64>)> {
            let (kp, jac) = self.residual(x)?;
            let f = DVector::from_iterator(
                2 * kp.len(),
                kp.iter().zip(target.chunks(2)).flat_map(|(c, t)| {
                    let v = c.value();
                    [v.re - t[0], v.im - t[1]]
                }),
            );
            Ok((f, jac))
        };
        let mut x = y.to_vec();
        let (mut f, mut jac) = eval(&x)?;
        for _ in 0..NEWTON_MAX_ITER {
            let cond = condition_number(&jac);
            if !(cond < 1e12) {
                return Err(GkError::Regularity {
                    block: self.block_name(),
                    point: x,
                    condition: cond,
                });
            }
            if f.amax() <= NEWTON_TOL * scale {
                return Ok((x, jac));
            }
            let step = jac.clone().lu().solve(&f).ok_or_else(|| GkError::Regularity {
                block: self.block_name(),
                point: x.clone(),
                condition: f64::INFINITY,
            })?;
            let mut lambda = 1.0;
            loop {
                let mut trial = x.clone();
                for (i, &a) in self.slots.iter().enumerate() {
                    trial[2 * a] -= lambda * step[2 * i];
                    trial[2 * a + 1] -= lambda * step[2 * i + 1];
                }
                let (ft, jt) = eval(&trial)?;
                if ft.norm() < f.norm() || lambda < 1e-6 {
                    x = trial;
                    f = ft;
                    jac = jt;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if f.amax() <= NEWTON_TOL * scale {
            return Ok((x, jac));
        }
        Err(GkError::NonConvergence {
            iterations: NEWTON_MAX_ITER,
            residual: f.amax(),
        })
    }
}

/// Jet of order `order` with the given value and first partials (jets of
/// order `order − 1`).
fn from_gradient(space: &Arc<JetSpace>, order: usize, value: f64, grads: &[Jet]) -> Result<Jet> {
    let len = space.len(order);
    let mut c = vec![0.0; len];
    c[0] = value;
    for (slot, ci) in c.iter_mut().enumerate().skip(1) {
        let e = space.exponent(slot);
        let v = e.iter().position(|&k| k > 0).expect("nonzero multi-index");
        let mut lower = e.to_vec();
        lower[v] -= 1;
        *ci = grads[v].coeff(&lower) / e[v] as f64;
    }
    Jet::from_coeffs(space, order, c)
}

impl Potential for LegendrePotential {
    /// Uses `∂K̃/∂y_v = ∂K/∂x_v` off the swapped slots and `∂K̃/∂P̃ = −P`, so
    /// an order-`k` jet of `K̃` needs `P(q, P̃)` only to order `k − 1`.
    fn jet(&self, space: &Arc<JetSpace>, point: &[f64], order: usize) -> Result<Jet> {
        let n = self.chart.real_dim();
        let (x0, jac) = self.solve(point)?;
        let k = CJet::real(self.base.jet(space, &x0, order)?);
        let mut value = k.re.value();
        for &a in &self.slots {
            value -= 2.0 * (x0[2 * a] * point[2 * a] - x0[2 * a + 1] * point[2 * a + 1]);
        }
        if order == 0 {
            return Jet::from_coeffs(space, 0, vec![value]);
        }
        let inner = order - 1;
        let pairs = self.chart.pairs();
        let kp: Vec<CJet> = self
            .slots
            .iter()
            .map(|&a| wirtinger_chain(&k, &pairs, &[Slot::holo(a)]).map(|c| c.truncate(inner)))
            .collect::<Result<_>>()?;
        let lu = jac.lu();
        let vars: Vec<Jet> = (0..n).map(|v| Jet::variable(space, inner, v, point[v])).collect();
        let mut inputs = vars.clone();
        for &a in &self.slots {
            inputs[2 * a] = Jet::constant(space, inner, x0[2 * a]);
            inputs[2 * a + 1] = Jet::constant(space, inner, x0[2 * a + 1]);
        }
        // chord iteration: each pass fixes one more Taylor order of P(q, P̃)
        for _ in 0..inner {
            let mut f = Vec::with_capacity(2 * self.slots.len());
            for (c, &a) in kp.iter().zip(&self.slots) {
                f.push(&c.re.substitute(&inputs)? - &vars[2 * a]);
                f.push(&c.im.substitute(&inputs)? - &vars[2 * a + 1]);
            }
            let len = f[0].coeffs().len();
            for slot in 1..len {
                let rhs = DVector::from_iterator(f.len(), f.iter().map(|j| j.coeffs()[slot]));
                let d = lu.solve(&rhs).ok_or_else(|| GkError::Regularity {
                    block: self.block_name(),
                    point: x0.clone(),
                    condition: f64::INFINITY,
                })?;
                for (i, &a) in self.slots.iter().enumerate() {
                    for s in 0..2 {
                        let mut c = inputs[2 * a + s].coeffs().to_vec();
                        c[slot] -= d[2 * i + s];
                        inputs[2 * a + s] = Jet::from_coeffs(space, inner, c)?;
                    }
                }
            }
        }
        let mut grads = Vec::with_capacity(n);
        for v in 0..n {
            let swapped = self.slots.iter().find(|&&a| v / 2 == a);
            grads.push(match swapped {
                // −2 Re(P P̃) differentiated in P̃_x, P̃_y
                Some(_) if v % 2 == 0 => inputs[v].scale(-2.0),
                Some(_) => inputs[v].scale(2.0),
                None => k.re.derivative(v)?.truncate(inner).substitute(&inputs)?,
            });
        }
        from_gradient(space, order, value, &grads)
    }
}

/// Changes polarization on the listed leaf pairs (indices into the q/P
/// blocks). The new scenario has the same chart, with `P̃_a = ∂K/∂P_a`
/// occupying the swapped `P_a` slots.
pub fn legendre_transform(scenario: &PotentialScenario, swap: &[usize]) -> Result<PotentialScenario> {
    if scenario.case != Case::Symplectic {
        return Err(GkError::Precondition(format!(
            "polarization change needs a symplectic scenario, `{}` is `{}`",
            scenario.name, scenario.case
        )));
    }
    if swap.is_empty() {
        return Ok(scenario.clone());
    }
    let lp = leaf_pairs(&scenario.chart);
    let mut slots = Vec::new();
    for &i in swap {
        let &(_, p) = lp.get(i).ok_or_else(|| {
            GkError::Precondition(format!("swap index {i} out of range: {} leaf pairs", lp.len()))
        })?;
        if !slots.contains(&p) {
            slots.push(p);
        }
    }
    let pot = LegendrePotential {
        base: scenario.potential.clone(),
        chart: scenario.chart.clone(),
        slots,
    };
    let mut out = scenario.with_potential(Arc::new(pot), None);
    out.name = format!("{}~legendre", scenario.name);
    out.deformation = None;
    // singular swap blocks and failed solves surface here rather than mid-build
    let lp = out.potential.clone();
    for x in out.points() {
        let sp = JetSpace::new(out.chart.real_dim(), 0)?;
        lp.jet(&sp, &x, 0)?;
    }
    Ok(out)
}

/// Image of an old-coordinate point in the new coordinates, with the real
/// Jacobian of the map.
pub fn legendre_map(scenario: &PotentialScenario, swap: &[usize], x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chart = &scenario.chart;
    let n = chart.real_dim();
    let lp = leaf_pairs(chart);
    let space = JetSpace::new(n, 2)?;
    let k = CJet::real(scenario.potential.jet(&space, x, 2)?);
    let pairs = chart.pairs();
    let mut y = x.to_vec();
    let mut d = DMatrix::identity(n, n);
    for &i in swap {
        let &(_, p) = lp
            .get(i)
            .ok_or_else(|| GkError::Precondition(format!("swap index {i} out of range")))?;
        let f = wirtinger_chain(&k, &pairs, &[Slot::holo(p)])?;
        y[2 * p] = f.re.value();
        y[2 * p + 1] = f.im.value();
        for c in 0..n {
            d[(2 * p, c)] = f.re.derivative(c)?.value();
            d[(2 * p + 1, c)] = f.im.derivative(c)?.value();
        }
    }
    Ok((y, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{Coord, Role};

    fn scenario(k: &str) -> PotentialScenario {
        let chart = Chart::new("leaf", vec![Coord::new("q", Role::LeafQ), Coord::new("P", Role::LeafP)]).unwrap();
        PotentialScenario::parse("s", chart, Case::Symplectic, k)
            .unwrap()
            .with_sampling(0.3, 8, 5)
    }

    #[test]
    fn quadratic_matches_closed_form() {
        let c = 0.5;
        let s = scenario("2*re(q*P) + 0.5*(abs2(q) + abs2(P))");
        let t = legendre_transform(&s, &[0]).unwrap();
        let oracle = s.chart.parse("0.5*abs2(q) - abs2(P - q)/0.5").unwrap();
        let sp = JetSpace::new(4, 4).unwrap();
        for y in t.points() {
            let a = t.potential.jet(&sp, &y, 4).unwrap();
            let b = oracle.eval_jet_in(&sp, &y, 4).unwrap();
            for (u, v) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((u - v).abs() < 1e-10, "{u} vs {v} (c = {c})");
            }
        }
    }

    #[test]
    fn empty_swap_is_identity() {
        let s = scenario("2*re(q*P) + 0.5*(abs2(q) + abs2(P))");
        let t = legendre_transform(&s, &[]).unwrap();
        assert_eq!(t.name, s.name);
    }

    #[test]
    fn singular_block_is_named() {
        let s = scenario("2*re(q*P) + abs2(q)");
        let e = legendre_transform(&s, &[0]).unwrap_err();
        match e {
            GkError::Regularity { block, .. } => assert!(block.contains("[P]"), "{block}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn omega_is_invariant_under_nonlinear_swap() {
        use crate::gkcore::{run_battery, BatteryOptions};
        let s = scenario("2*re(q*P) + 0.5*(abs2(q) + abs2(P)) + 0.05*re(q*q*conj(P))");
        let t = legendre_transform(&s, &[0]).unwrap();
        let old = super::super::build_symplectic(&s).unwrap();
        let new = super::super::build_symplectic(&t).unwrap();
        assert!(new.report.passed(), "{:?}", new.report.failures());
        for x in s.points() {
            let (y, d) = legendre_map(&s, &[0], &x).unwrap();
            let wo = old.bundle.fields(&x).unwrap().extras["Omega"].to_matrix();
            let wn = new.bundle.fields(&y).unwrap().extras["Omega"].to_matrix();
            let pulled = d.transpose() * wn * d;
            assert!((pulled - wo).abs().max() < 1e-6);
        }
        let r = run_battery(&new.bundle, &t.points(), &BatteryOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
    }
}
