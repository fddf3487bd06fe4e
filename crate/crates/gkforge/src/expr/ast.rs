//! Lowered expression trees.
//!
//! Expressions are stored as a hash-consed arena of real-valued operations.
//! Complex-valued surface syntax is lowered into pairs of real nodes, so the
//! arena only ever mentions real variables.

use std::collections::HashMap;
use std::fmt::Write as _;

/// A real-valued operation; operands are arena indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Pow(usize, i32),
    Exp(usize),
    Log(usize),
    Sin(usize),
    Cos(usize),
    Sqrt(usize),
    /// `atan2(y, x)`; only produced by lowering complex logarithms.
    Atan2(usize, usize),
}

impl Op {
    fn key(&self) -> (u8, usize, usize, u64) {
        match *self {
            Op::Const(c) => (0, 0, 0, c.to_bits()),
            Op::Var(v) => (1, v, 0, 0),
            Op::Add(a, b) => (2, a, b, 0),
            Op::Sub(a, b) => (3, a, b, 0),
            Op::Mul(a, b) => (4, a, b, 0),
            Op::Div(a, b) => (5, a, b, 0),
            Op::Neg(a) => (6, a, 0, 0),
            Op::Pow(a, n) => (7, a, 0, n as u64),
            Op::Exp(a) => (8, a, 0, 0),
            Op::Log(a) => (9, a, 0, 0),
            Op::Sin(a) => (10, a, 0, 0),
            Op::Cos(a) => (11, a, 0, 0),
            Op::Sqrt(a) => (12, a, 0, 0),
            Op::Atan2(a, b) => (13, a, b, 0),
        }
    }

    pub(crate) fn operands(&self) -> Vec<usize> {
        match *self {
            Op::Const(_) | Op::Var(_) => vec![],
            Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) | Op::Div(a, b) | Op::Atan2(a, b) => {
                vec![a, b]
            }
            Op::Neg(a)
            | Op::Pow(a, _)
            | Op::Exp(a)
            | Op::Log(a)
            | Op::Sin(a)
            | Op::Cos(a)
            | Op::Sqrt(a) => vec![a],
        }
    }
}

/// A parsed expression over the real coordinates of a chart.
///
/// `re` and `im` index the real and imaginary parts of the value; `im` is
/// `None` when the expression is real by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprAst {
    pub(crate) nodes: Vec<Op>,
    pub(crate) re: usize,
    pub(crate) im: Option<usize>,
    pub(crate) var_names: Vec<String>,
    pub(crate) live_re: Vec<bool>,
    pub(crate) live_all: Vec<bool>,
}

impl ExprAst {
    pub fn nodes(&self) -> &[Op] {
        &self.nodes
    }

    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    /// True when the imaginary part was eliminated during lowering.
    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    pub fn re_root(&self) -> usize {
        self.re
    }

    pub fn im_root(&self) -> Option<usize> {
        self.im
    }

    /// Variables referenced by the real part (or both parts).
    pub fn referenced_vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.live_all[*i])
            .filter_map(|(_, op)| match op {
                Op::Var(k) => Some(*k),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Infix rendering of a node, used in error messages.
    pub fn render(&self, node: usize) -> String {
        let mut s = String::new();
        self.render_into(node, &mut s);
        s
    }

    fn render_into(&self, node: usize, s: &mut String) {
        let bin = |s: &mut String, a: usize, op: &str, b: usize| {
            s.push('(');
            self.render_into(a, s);
            s.push_str(op);
            self.render_into(b, s);
            s.push(')');
        };
        let call = |s: &mut String, f: &str, a: usize| {
            s.push_str(f);
            s.push('(');
            self.render_into(a, s);
            s.push(')');
        };
        match self.nodes[node] {
            Op::Const(c) => {
                let _ = write!(s, "{c}");
            }
            Op::Var(v) => s.push_str(&self.var_names[v]),
            Op::Add(a, b) => bin(s, a, " + ", b),
            Op::Sub(a, b) => bin(s, a, " - ", b),
            Op::Mul(a, b) => bin(s, a, "*", b),
            Op::Div(a, b) => bin(s, a, "/", b),
            Op::Neg(a) => {
                s.push('-');
                self.render_into(a, s);
            }
            Op::Pow(a, n) => {
                self.render_into(a, s);
                let _ = write!(s, "^{n}");
            }
            Op::Exp(a) => call(s, "exp", a),
            Op::Log(a) => call(s, "log", a),
            Op::Sin(a) => call(s, "sin", a),
            Op::Cos(a) => call(s, "cos", a),
            Op::Sqrt(a) => call(s, "sqrt", a),
            Op::Atan2(a, b) => bin(s, a, ", ", b),
        }
    }

    /// Renders the whole expression.
    pub fn to_text(&self) -> String {
        match self.im {
            None => self.render(self.re),
            Some(im) => format!("{} + i*{}", self.render(self.re), self.render(im)),
        }
    }
}

/// Complex value during lowering: real part and optional imaginary part.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Cx {
    pub re: usize,
    pub im: Option<usize>,
}

/// Hash-consing arena builder with complex lowering helpers.
#[derive(Default)]
pub(crate) struct Builder {
    nodes: Vec<Op>,
    memo: HashMap<(u8, usize, usize, u64), usize>,
}

impl Builder {
    pub fn push(&mut self, op: Op) -> usize {
        let key = op.key();
        if let Some(&i) = self.memo.get(&key) {
            return i;
        }
        self.nodes.push(op);
        let i = self.nodes.len() - 1;
        self.memo.insert(key, i);
        i
    }

    pub fn konst(&mut self, c: f64) -> usize {
        self.push(Op::Const(c))
    }

    fn as_const(&self, i: usize) -> Option<f64> {
        match self.nodes[i] {
            Op::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn add(&mut self, a: usize, b: usize) -> usize {
        match (self.as_const(a), self.as_const(b)) {
            (Some(x), Some(y)) => self.konst(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => self.push(Op::Add(a, b)),
        }
    }

    pub fn sub(&mut self, a: usize, b: usize) -> usize {
        match (self.as_const(a), self.as_const(b)) {
            (Some(x), Some(y)) => self.konst(x - y),
            (_, Some(y)) if y == 0.0 => a,
            (Some(x), _) if x == 0.0 => self.neg(b),
            _ => self.push(Op::Sub(a, b)),
        }
    }

    pub fn mul(&mut self, a: usize, b: usize) -> usize {
        match (self.as_const(a), self.as_const(b)) {
            (Some(x), Some(y)) => self.konst(x * y),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            _ => self.push(Op::Mul(a, b)),
        }
    }

    pub fn div(&mut self, a: usize, b: usize) -> usize {
        match self.as_const(b) {
            Some(y) if y == 1.0 => a,
            _ => self.push(Op::Div(a, b)),
        }
    }

    pub fn neg(&mut self, a: usize) -> usize {
        match self.nodes[a] {
            Op::Const(x) => self.konst(-x),
            Op::Neg(inner) => inner,
            _ => self.push(Op::Neg(a)),
        }
    }

    fn add_opt(&mut self, a: Option<usize>, b: Option<usize>) -> Option<usize> {
        match (a, b) {
            (None, None) => None,
            (Some(x), None) | (None, Some(x)) => Some(x),
            (Some(x), Some(y)) => Some(self.add(x, y)),
        }
    }

    fn mul_opt(&mut self, a: Option<usize>, b: Option<usize>) -> Option<usize> {
        match (a, b) {
            (Some(x), Some(y)) => Some(self.mul(x, y)),
            _ => None,
        }
    }

    pub fn real(&mut self, re: usize) -> Cx {
        Cx { re, im: None }
    }

    pub fn c_add(&mut self, a: Cx, b: Cx) -> Cx {
        let re = self.add(a.re, b.re);
        let im = self.add_opt(a.im, b.im);
        Cx { re, im }
    }

    pub fn c_neg(&mut self, a: Cx) -> Cx {
        let re = self.neg(a.re);
        let im = a.im.map(|i| self.neg(i));
        Cx { re, im }
    }

    pub fn c_sub(&mut self, a: Cx, b: Cx) -> Cx {
        let re = self.sub(a.re, b.re);
        let im = match (a.im, b.im) {
            (None, None) => None,
            (Some(x), None) => Some(x),
            (None, Some(y)) => Some(self.neg(y)),
            (Some(x), Some(y)) => Some(self.sub(x, y)),
        };
        Cx { re, im }
    }

    pub fn c_mul(&mut self, a: Cx, b: Cx) -> Cx {
        let rr = self.mul(a.re, b.re);
        let ii = self.mul_opt(a.im, b.im);
        let re = match ii {
            None => rr,
            Some(ii) => self.sub(rr, ii),
        };
        let ri = b.im.map(|bi| self.mul(a.re, bi));
        let ir = a.im.map(|ai| self.mul(ai, b.re));
        let im = self.add_opt(ri, ir);
        Cx { re, im }
    }

    pub fn c_conj(&mut self, a: Cx) -> Cx {
        let im = a.im.map(|i| self.neg(i));
        Cx { re: a.re, im }
    }

    pub fn c_abs2(&mut self, a: Cx) -> usize {
        let rr = self.mul(a.re, a.re);
        match a.im {
            None => rr,
            Some(i) => {
                let ii = self.mul(i, i);
                self.add(rr, ii)
            }
        }
    }

    pub fn c_recip(&mut self, b: Cx) -> Cx {
        let one = self.konst(1.0);
        match b.im {
            None => Cx {
                re: self.div(one, b.re),
                im: None,
            },
            Some(bi) => {
                let den = self.c_abs2(b);
                let re = self.div(b.re, den);
                let ni = self.neg(bi);
                let im = self.div(ni, den);
                Cx { re, im: Some(im) }
            }
        }
    }

    pub fn c_div(&mut self, a: Cx, b: Cx) -> Cx {
        match b.im {
            None => {
                let re = self.div(a.re, b.re);
                let im = a.im.map(|i| self.div(i, b.re));
                Cx { re, im }
            }
            Some(_) => {
                let r = self.c_recip(b);
                self.c_mul(a, r)
            }
        }
    }

    pub fn c_pow(&mut self, a: Cx, n: i32) -> Cx {
        if a.im.is_none() {
            let re = self.push(Op::Pow(a.re, n));
            return Cx { re, im: None };
        }
        let base = if n < 0 { self.c_recip(a) } else { a };
        let mut k = n.unsigned_abs();
        let one = self.konst(1.0);
        let mut result = Cx { re: one, im: None };
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                result = self.c_mul(result, b);
            }
            k >>= 1;
            if k > 0 {
                b = self.c_mul(b, b);
            }
        }
        result
    }

    pub fn c_exp(&mut self, a: Cx) -> Cx {
        let e = self.push(Op::Exp(a.re));
        match a.im {
            None => Cx { re: e, im: None },
            Some(b) => {
                let c = self.push(Op::Cos(b));
                let s = self.push(Op::Sin(b));
                let re = self.mul(e, c);
                let im = self.mul(e, s);
                Cx { re, im: Some(im) }
            }
        }
    }

    pub fn c_log(&mut self, a: Cx) -> Cx {
        match a.im {
            None => {
                let re = self.push(Op::Log(a.re));
                Cx { re, im: None }
            }
            Some(b) => {
                let m = self.c_abs2(a);
                let l = self.push(Op::Log(m));
                let half = self.konst(0.5);
                let re = self.mul(half, l);
                let im = self.push(Op::Atan2(b, a.re));
                Cx { re, im: Some(im) }
            }
        }
    }

    fn cosh_sinh(&mut self, b: usize) -> (usize, usize) {
        let e = self.push(Op::Exp(b));
        let nb = self.neg(b);
        let f = self.push(Op::Exp(nb));
        let half = self.konst(0.5);
        let s = self.add(e, f);
        let d = self.sub(e, f);
        (self.mul(half, s), self.mul(half, d))
    }

    pub fn c_sin(&mut self, a: Cx) -> Cx {
        let s = self.push(Op::Sin(a.re));
        match a.im {
            None => Cx { re: s, im: None },
            Some(b) => {
                let c = self.push(Op::Cos(a.re));
                let (ch, sh) = self.cosh_sinh(b);
                let re = self.mul(s, ch);
                let im = self.mul(c, sh);
                Cx { re, im: Some(im) }
            }
        }
    }

    pub fn c_cos(&mut self, a: Cx) -> Cx {
        let c = self.push(Op::Cos(a.re));
        match a.im {
            None => Cx { re: c, im: None },
            Some(b) => {
                let s = self.push(Op::Sin(a.re));
                let (ch, sh) = self.cosh_sinh(b);
                let re = self.mul(c, ch);
                let t = self.mul(s, sh);
                let im = self.neg(t);
                Cx { re, im: Some(im) }
            }
        }
    }

    pub fn c_sqrt(&mut self, a: Cx) -> Cx {
        match a.im {
            None => {
                let re = self.push(Op::Sqrt(a.re));
                Cx { re, im: None }
            }
            Some(_) => {
                let l = self.c_log(a);
                let half = self.konst(0.5);
                let h = Cx { re: half, im: None };
                let hl = self.c_mul(h, l);
                self.c_exp(hl)
            }
        }
    }

    pub fn finish(self, value: Cx, var_names: Vec<String>) -> ExprAst {
        let n = self.nodes.len();
        let mark = |roots: &[usize]| {
            let mut live = vec![false; n];
            let mut stack: Vec<usize> = roots.to_vec();
            while let Some(i) = stack.pop() {
                if live[i] {
                    continue;
                }
                live[i] = true;
                stack.extend(self.nodes[i].operands());
            }
            live
        };
        let live_re = mark(&[value.re]);
        let mut roots = vec![value.re];
        roots.extend(value.im);
        let live_all = mark(&roots);
        ExprAst {
            nodes: self.nodes,
            re: value.re,
            im: value.im,
            var_names,
            live_re,
            live_all,
        }
    }
}
