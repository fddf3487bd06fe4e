use std::sync::Arc;

use num_complex::Complex64;

use super::ast::{ExprAst, Op};
use super::jet::{Jet, JetSpace, MAX_ORDER};
use super::wirtinger::CJet;
use crate::error::{GkError, Result};

impl ExprAst {
    fn run(&self, inputs: &[Jet], live: &[bool]) -> Result<Vec<Option<Jet>>> {
        if inputs.len() != self.nvars() {
            return Err(GkError::Dimension {
                expected: self.nvars(),
                got: inputs.len(),
            });
        }
        let Some(first) = inputs.first() else {
            return Err(GkError::Precondition(
                "expression has no variables to evaluate over".into(),
            ));
        };
        let space = first.space().clone();
        let order = inputs.iter().map(Jet::order).min().unwrap_or(0);
        let mut vals: Vec<Option<Jet>> = vec![None; self.nodes.len()];
        for (i, op) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            let get = |k: usize| vals[k].as_ref().expect("operands precede their users");
            let wrap = |e: GkError| match e {
                GkError::Domain { message, .. } => GkError::Domain {
                    node: self.render(i),
                    message,
                },
                other => other,
            };
            let v = match *op {
                Op::Const(c) => Jet::constant(&space, order, c),
                Op::Var(k) => inputs[k].truncate(order),
                Op::Add(a, b) => get(a) + get(b),
                Op::Sub(a, b) => get(a) - get(b),
                Op::Mul(a, b) => get(a) * get(b),
                Op::Div(a, b) => get(a).div(get(b)).map_err(wrap)?,
                Op::Neg(a) => -get(a),
                Op::Pow(a, n) => get(a).powi(n).map_err(wrap)?,
                Op::Exp(a) => get(a).exp(),
                Op::Log(a) => get(a).ln().map_err(wrap)?,
                Op::Sin(a) => get(a).sin(),
                Op::Cos(a) => get(a).cos(),
                Op::Sqrt(a) => get(a).sqrt().map_err(wrap)?,
                Op::Atan2(y, x) => get(y).atan2(get(x)).map_err(wrap)?,
            };
            vals[i] = Some(v);
        }
        Ok(vals)
    }

    /// Real part evaluated on arbitrary input jets (composition).
    pub fn eval_with(&self, inputs: &[Jet]) -> Result<Jet> {
        let mut vals = self.run(inputs, &self.live_re)?;
        Ok(vals[self.re].take().expect("root is live"))
    }

    /// Complex value evaluated on arbitrary input jets.
    pub fn eval_complex_with(&self, inputs: &[Jet]) -> Result<CJet> {
        let mut vals = self.run(inputs, &self.live_all)?;
        let re = vals[self.re].take().expect("root is live");
        let im = match self.im {
            Some(i) => vals[i].take().expect("root is live"),
            None => Jet::zero(re.space(), re.order()),
        };
        Ok(CJet { re, im })
    }

    fn check_point(&self, point: &[f64], order: usize) -> Result<()> {
        if order > MAX_ORDER {
            return Err(GkError::OrderExceeded {
                needed: order,
                available: MAX_ORDER,
            });
        }
        if point.len() != self.nvars() {
            return Err(GkError::Dimension {
                expected: self.nvars(),
                got: point.len(),
            });
        }
        Ok(())
    }

    /// Taylor jet of the real part at `point`.
    pub fn eval_jet(&self, point: &[f64], order: usize) -> Result<Jet> {
        self.check_point(point, order)?;
        let space = JetSpace::new(point.len(), order)?;
        self.eval_jet_in(&space, point, order)
    }

    /// As [`ExprAst::eval_jet`], reusing a prepared jet space.
    pub fn eval_jet_in(&self, space: &Arc<JetSpace>, point: &[f64], order: usize) -> Result<Jet> {
        self.check_point(point, order)?;
        self.eval_with(&Jet::coordinates(space, order, point))
    }

    /// Complex jet (real and imaginary parts) at `point`.
    pub fn eval_cjet_in(&self, space: &Arc<JetSpace>, point: &[f64], order: usize) -> Result<CJet> {
        self.check_point(point, order)?;
        self.eval_complex_with(&Jet::coordinates(space, order, point))
    }

    /// Real part at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(self.eval_jet(point, 0)?.value())
    }

    /// Complex value at `point`.
    pub fn eval_complex(&self, point: &[f64]) -> Result<Complex64> {
        self.check_point(point, 0)?;
        let space = JetSpace::new(point.len(), 0)?;
        Ok(self.eval_cjet_in(&space, point, 0)?.value())
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse, CoordSpec};
    use super::*;

    fn chart() -> Vec<CoordSpec> {
        vec![CoordSpec::with_aliases("z", "x", "y")]
    }

    #[test]
    fn x2y_partials() {
        let ast = parse("x^2*y", &chart()).unwrap();
        let j = ast.eval_jet(&[1.0, 2.0], 2).unwrap();
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.partial(&[1, 0]).unwrap(), 4.0);
        assert_eq!(j.partial(&[0, 1]).unwrap(), 1.0);
        assert_eq!(j.partial(&[2, 0]).unwrap(), 4.0);
        assert_eq!(j.partial(&[1, 1]).unwrap(), 2.0);
        assert_eq!(j.partial(&[0, 2]).unwrap(), 0.0);
    }

    #[test]
    fn complex_log_real_part_matches_log_modulus() {
        let ast = parse("re(log(z))", &chart()).unwrap();
        let v = ast.eval(&[0.3, -0.4]).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn complex_functions_match_num_complex() {
        let w = Complex64::new(0.3, -0.7);
        let cases: Vec<(&str, Complex64)> = vec![
            ("exp(z)", w.exp()),
            ("log(z)", w.ln()),
            ("sin(z)", w.sin()),
            ("cos(z)", w.cos()),
            ("sqrt(z)", w.sqrt()),
            ("1/z", 1.0 / w),
            ("z^3", w * w * w),
            ("z^-2", 1.0 / (w * w)),
            ("conj(z)*z", w.conj() * w),
        ];
        for (text, expect) in cases {
            let ast = parse(text, &chart()).unwrap();
            let got = ast.eval_complex(&[w.re, w.im]).unwrap();
            assert!((got - expect).norm() < 1e-14, "{text}: {got} vs {expect}");
        }
    }

    #[test]
    fn domain_error_names_node() {
        let ast = parse("log(x - 1)", &chart()).unwrap();
        match ast.eval_jet(&[0.5, 0.0], 2) {
            Err(GkError::Domain { node, .. }) => assert_eq!(node, "log((x - 1))"),
            other => panic!("unexpected {other:?}"),
        }
        let ast = parse("1/x", &chart()).unwrap();
        assert!(matches!(ast.eval(&[0.0, 1.0]), Err(GkError::Domain { .. })));
    }

    #[test]
    fn unused_imaginary_branch_is_not_evaluated() {
        // atan2 at the origin would fail, but re() discards it
        let ast = parse("re(log(z)) + 1", &chart()).unwrap();
        assert!(ast.eval_jet(&[1.0, 0.0], 3).is_ok());
    }

    #[test]
    fn order_above_four_is_rejected() {
        let ast = parse("x", &chart()).unwrap();
        assert!(matches!(
            ast.eval_jet(&[0.0, 0.0], 5),
            Err(GkError::OrderExceeded { .. })
        ));
    }
}
