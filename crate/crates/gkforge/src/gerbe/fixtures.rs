//! Small covers shared by the gerbe unit tests.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::charts::{Coord, Role};

pub fn parse(chart: &Chart, text: &str) -> Arc<ExprAst> {
    Arc::new(chart.parse(text).unwrap())
}

fn cover(name: &str, kind: CoverKind, charts: Vec<CoverChart>) -> CoverComplex {
    CoverComplex {
        name: name.into(),
        kind,
        charts,
        transitions: Vec::new(),
        doubles: Vec::new(),
        triples: Vec::new(),
        quads: Vec::new(),
        chern: None,
        tol: Tolerances::default(),
    }
}

/// Two charts `z`, `w = 1/z` with Fubini–Study potentials.
pub fn cp1(f01: &str) -> CoverComplex {
    let c0 = Arc::new(Chart::new("u0", vec![Coord::new("z", Role::Z)]).unwrap());
    let c1 = Arc::new(Chart::new("u1", vec![Coord::new("w", Role::Z)]).unwrap());
    let mut c = cover(
        "cp1",
        CoverKind::Kahler,
        vec![
            CoverChart {
                name: "u0".into(),
                chart: c0.clone(),
                potential: Some(parse(&c0, "log(1 + abs2(z))")),
            },
            CoverChart {
                name: "u1".into(),
                chart: c1.clone(),
                potential: Some(parse(&c1, "log(1 + abs2(w))")),
            },
        ],
    );
    c.transitions = vec![
        Transition {
            from: 0,
            to: 1,
            map: vec![parse(&c0, "1/z")],
        },
        Transition {
            from: 1,
            to: 0,
            map: vec![parse(&c1, "1/w")],
        },
    ];
    let points = sample_annulus(60, 0.5, 2.0, 11);
    let points_in = points.iter().map(|p| c.map_point(0, 1, p).unwrap()).collect();
    c.doubles.push(DoubleOverlap {
        charts: [0, 1],
        points,
        points_in: vec![(1, points_in)],
        f: Some(parse(&c0, f01)),
        ..Default::default()
    });
    c
}

fn biblock(name: &str) -> Arc<Chart> {
    Arc::new(Chart::new(name, vec![Coord::new("z", Role::Z), Coord::new("zp", Role::ZPrime)]).unwrap())
}

/// `(z, z′)` points with `|z|` in `[r_min, r_max)` and `|z′| < 1`.
fn points2(count: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_annulus(count, r_min, r_max, seed ^ 0x5a5a)
        .into_iter()
        .map(|mut p| {
            p.push(rng.random_range(-0.7..0.7));
            p.push(rng.random_range(-0.7..0.7));
            p
        })
        .collect()
}

/// `n` copies of the `(z, z′)` plane glued by the identity.
fn identity_cover(name: &str, n: usize, potentials: Option<&[String]>) -> CoverComplex {
    let charts = (0..n)
        .map(|a| {
            let chart = biblock(&format!("u{a}"));
            let potential = potentials.map(|k| parse(&chart, &k[a]));
            CoverChart {
                name: format!("u{a}"),
                chart,
                potential,
            }
        })
        .collect();
    let mut c = cover(name, CoverKind::General, charts);
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let ch = &c.charts[a].chart;
                c.transitions.push(Transition {
                    from: a,
                    to: b,
                    map: vec![parse(ch, "z"), parse(ch, "zp")],
                });
            }
        }
    }
    c
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                let start = t.last().map_or(0, |l| l + 1);
                (start..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn toy_c(offsets: Option<[f64; 4]>, a: usize, b: usize) -> f64 {
    match offsets {
        Some(p) => p[a] - p[b],
        None => 0.3 * (a as f64 + 1.0) - 0.7 * (b as f64) + 0.11 * (a * b) as f64,
    }
}

fn dd(a: usize, b: usize) -> f64 {
    0.2 * (b as f64) - 0.45 * (a as f64) + 0.05 * (a * a * b) as f64
}

pub fn toy_h_plus_text(offsets: Option<[f64; 4]>, a: usize, b: usize) -> String {
    format!("exp(({})*z + ({})*zp)", toy_c(offsets, a, b), dd(a, b))
}

pub fn toy_g_text(offsets: Option<[f64; 4]>, [a, b, e]: [usize; 3]) -> String {
    let c = |s, t| toy_c(offsets, s, t);
    format!("exp(({})*z)", c(b, e) - c(a, e) + c(a, b))
}

/// Four charts with `h+ = exp(c z + d z′)`, `h− = exp(c z − d z̄′)`, `G = δ exp(c z)`,
/// `F = δ exp(−d z′)`. With `potential_offsets`, `c_ab = p_a − p_b` and the
/// charts carry `K_a = |z|² − |z′|² + 4 p_a Re z`, so the gluing data are
/// complete.
pub fn toy_gerbe(potential_offsets: Option<[f64; 4]>) -> CoverComplex {
    let n = 4;
    let cc = |a: usize, b: usize| toy_c(potential_offsets, a, b);
    let ks: Option<Vec<String>> =
        potential_offsets.map(|p| p.iter().map(|pa| format!("abs2(z) - abs2(zp) + 4*({pa})*re(z)")).collect());
    let mut c = identity_cover("toy", n, ks.as_deref());
    let ch = c.charts[0].chart.clone();
    for (s, t) in tuples(n, 2).iter().map(|t| (t[0], t[1])) {
        let points = points2(12, 0.9, 1.0, (10 * s + t) as u64);
        let with_gluing = potential_offsets.is_some();
        c.doubles.push(DoubleOverlap {
            charts: [s, t],
            points,
            points_in: Vec::new(),
            f: with_gluing.then(|| parse(&ch, &format!("({})*z + ({})*zp", cc(s, t), dd(s, t)))),
            g: with_gluing.then(|| parse(&ch, &format!("({})*z - ({})*conj(zp)", cc(s, t), dd(s, t)))),
            h_plus: Some(parse(&ch, &toy_h_plus_text(potential_offsets, s, t))),
            h_minus: Some(parse(&ch, &format!("exp(({})*z - ({})*conj(zp))", cc(s, t), dd(s, t)))),
        });
    }
    for t in tuples(n, 3) {
        let (a, b, e) = (t[0], t[1], t[2]);
        let dd3 = dd(b, e) - dd(a, e) + dd(a, b);
        c.triples.push(TripleOverlap {
            charts: [a, b, e],
            points: points2(12, 0.9, 1.0, (100 * a + 10 * b + e) as u64),
            g: Some(parse(&ch, &toy_g_text(potential_offsets, [a, b, e]))),
            f: Some(parse(&ch, &format!("exp(({})*zp)", -dd3))),
        });
    }
    c.quads.push(QuadOverlap {
        charts: [0, 1, 2, 3],
        points: points2(20, 0.9, 1.0, 4),
    });
    c
}

/// Two flat `(z, z′)` charts with `K_b = K_a + Re(z z′)`.
pub fn commuting_pair(f: &str, g: Option<&str>) -> CoverComplex {
    let ks = ["abs2(z) - abs2(zp)".to_string(), "abs2(z) - abs2(zp) + re(z*zp)".to_string()];
    let mut c = identity_cover("flat_pair", 2, Some(&ks));
    c.kind = CoverKind::Commuting;
    let ch = c.charts[0].chart.clone();
    c.doubles.push(DoubleOverlap {
        charts: [0, 1],
        points: points2(40, 0.1, 1.5, 9),
        f: Some(parse(&ch, f)),
        g: g.map(|g| parse(&ch, g)),
        ..Default::default()
    });
    c
}
