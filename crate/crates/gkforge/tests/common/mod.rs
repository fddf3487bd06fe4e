#![allow(dead_code)]

use std::sync::Arc;

use gkforge::charts::{Chart, Coord, Role};
use gkforge::expr::ExprAst;
use gkforge::potentials::{Case, PotentialScenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const COMMUTING_GOLDEN: &str = "abs2(z) - abs2(zp) + 0.1*re(z*zp)*im(z*conj(zp)) + 0.05*re(z*z*conj(z)*zp)";
pub const SYMPLECTIC_GOLDEN: &str = "2*re(q*P) + 0.5*(abs2(q) + abs2(P)) + 0.05*re(q*q*conj(P))";
pub const GENERAL_COUPLED: &str = "abs2(z) - abs2(zp) + 2*re(q*P) + 0.5*(abs2(q) + abs2(P)) \
                                   + 0.1*re(z*conj(q))*im(conj(zp)*P) + 0.05*re(q*q*conj(P))";

pub fn line() -> Chart {
    Chart::new("line", vec![Coord::new("z", Role::Z)]).unwrap()
}

pub fn plane2() -> Chart {
    Chart::new("plane2", vec![Coord::new("z", Role::Z), Coord::new("zp", Role::ZPrime)]).unwrap()
}

pub fn leaf() -> Chart {
    Chart::new("leaf", vec![Coord::new("q", Role::LeafQ), Coord::new("P", Role::LeafP)]).unwrap()
}

pub fn mixed() -> Chart {
    Chart::new(
        "mixed",
        vec![
            Coord::new("z", Role::Z),
            Coord::new("zp", Role::ZPrime),
            Coord::new("q", Role::LeafQ),
            Coord::new("P", Role::LeafP),
        ],
    )
    .unwrap()
}

pub fn scenario(name: &str, chart: Chart, case: Case, k: &str, half_width: f64, samples: usize, seed: u64) -> PotentialScenario {
    PotentialScenario::parse(name, chart, case, k)
        .unwrap()
        .with_sampling(half_width, samples, seed)
}

/// Chart with `z = x + iy`, `w = u + iv`.
pub fn fd_chart() -> Chart {
    Chart::new(
        "fd",
        vec![Coord::aliased("z", Role::Z, "x", "y"), Coord::aliased("w", Role::ZPrime, "u", "v")],
    )
    .unwrap()
}

/// Random smooth real expression, finite on all of ℝ⁴. `Z` and `W` stand for
/// the two complex coordinates so callers can substitute them.
pub fn random_template(rng: &mut ChaCha8Rng, depth: usize) -> String {
    const LEAVES: [&str; 7] = ["re(Z)", "im(Z)", "re(W)", "im(W)", "abs2(Z)", "re(Z*W)", "im(Z*conj(W))"];
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.2) {
            format!("{:.3}", rng.random_range(-1.5..1.5))
        } else {
            LEAVES[rng.random_range(0..LEAVES.len())].to_string()
        };
    }
    let a = random_template(rng, depth - 1);
    match rng.random_range(0..10) {
        0 => format!("({a}) + ({})", random_template(rng, depth - 1)),
        1 => format!("({a}) - ({})", random_template(rng, depth - 1)),
        2 => format!("({a})*({})", random_template(rng, depth - 1)),
        3 => format!("exp(0.5*({a}))"),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("log(1 + ({a})^2)"),
        7 => format!("sqrt(2 + sin({a}))"),
        8 => format!("({a})/(2 + cos({}))", random_template(rng, depth - 1)),
        _ => format!("({a})^3"),
    }
}

pub fn instantiate(template: &str, z: &str, w: &str) -> String {
    template.replace('Z', z).replace('W', w)
}

/// A random expression over [`fd_chart`] and a point in `[-0.8, 0.8]⁴`.
pub fn random_pair(seed: u64) -> (String, Arc<ExprAst>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let text = instantiate(&random_template(&mut rng, 3), "z", "w");
    let ast = Arc::new(fd_chart().parse(&text).unwrap());
    let point = (0..4).map(|_| rng.random_range(-0.8..0.8)).collect();
    (text, ast, point)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central-difference estimate of `∂^e f` with step `h`: the tensor product
/// of one-dimensional `m`-th central differences.
fn central(f: &dyn Fn(&[f64]) -> f64, x: &[f64], e: &[u8], h: f64) -> f64 {
    fn rec(f: &dyn Fn(&[f64]) -> f64, x: &mut Vec<f64>, e: &[u8], v: usize, h: f64) -> f64 {
        if v == e.len() {
            return f(x);
        }
        let m = e[v] as usize;
        let base = x[v];
        let mut s = 0.0;
        for j in 0..=m {
            x[v] = base + (m as f64 / 2.0 - j as f64) * h;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binomial(m, j) * rec(f, x, e, v + 1, h);
        }
        x[v] = base;
        s
    }
    let k: usize = e.iter().map(|&m| m as usize).sum();
    rec(f, &mut x.to_vec(), e, 0, h) / h.powi(k as i32)
}

/// Central differences with two Richardson levels (error `O(h⁶)`); the step
/// grows with the order to keep roundoff below truncation.
pub fn fd_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], e: &[u8]) -> f64 {
    let k: usize = e.iter().map(|&m| m as usize).sum();
    let h = [0.0, 2e-3, 5e-3, 1e-2, 2e-2][k];
    let d: Vec<f64> = (0..3).map(|l| central(f, x, e, h / f64::powi(2.0, l))).collect();
    let r1 = |a: f64, b: f64| (4.0 * b - a) / 3.0;
    let (a, b) = (r1(d[0], d[1]), r1(d[1], d[2]));
    (16.0 * b - a) / 15.0
}

/// All multi-indices over `n` variables with total order in `1..=max`.
pub fn multi_indices(n: usize, max: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fn rec(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, v: usize, left: usize) {
        if v == cur.len() {
            if cur.iter().any(|&m| m > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for m in 0..=left {
            cur[v] = m as u8;
            rec(out, cur, v + 1, left - m);
        }
        cur[v] = 0;
    }
    rec(&mut out, &mut cur, 0, max);
    out
}

/// Worst `|jet − fd| / max(1, |fd|)` for orders 1 and 3–4 (order 2 is
/// reported with order 1's tolerance class excluded).
pub struct FdErrors {
    pub order1: f64,
    pub order2: f64,
    pub order34: f64,
}

pub fn fd_errors(ast: &ExprAst, x: &[f64]) -> FdErrors {
    let jet = ast.eval_jet(x, 4).unwrap();
    let f = |p: &[f64]| ast.eval(p).unwrap();
    let mut e = FdErrors {
        order1: 0.0,
        order2: 0.0,
        order34: 0.0,
    };
    for idx in multi_indices(x.len(), 4) {
        let k: usize = idx.iter().map(|&m| m as usize).sum();
        let a = jet.partial(&idx).unwrap();
        let b = fd_partial(&f, x, &idx);
        let r = (a - b).abs() / b.abs().max(1.0);
        match k {
            1 => e.order1 = e.order1.max(r),
            2 => e.order2 = e.order2.max(r),
            _ => e.order34 = e.order34.max(r),
        }
    }
    e
}
