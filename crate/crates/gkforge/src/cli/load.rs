//! Schema validation and reference resolution.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::schema::*;
use crate::charts::{Chart, Coord};
use crate::error::{GkError, Result};
use crate::expr::ExprAst;
use crate::gerbe::{
    ChernPiece, ChernSpec, CoverChart, CoverComplex, DoubleOverlap, QuadOverlap, Transition, TripleOverlap,
};
use crate::gkcore::{KappaChoice, SampleBox, Tolerances};
use crate::potentials::PotentialScenario;

/// Command-line settings that take precedence over the file's `run` block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub kappa: Option<KappaChoice>,
}

#[derive(Clone, Debug)]
pub struct LoadedScenario {
    pub scenario: PotentialScenario,
    pub deformation: Option<DeformationSpec>,
    pub legendre: Vec<usize>,
}

/// A resolved scenario file.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub scenarios: Vec<LoadedScenario>,
    pub covers: Vec<CoverComplex>,
    pub kappa: KappaChoice,
    pub tol: Tolerances,
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> GkError {
    GkError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut s = String::new();
    for seg in path.iter() {
        s.push('/');
        match seg {
            Segment::Seq { index } => s.push_str(&index.to_string()),
            Segment::Map { key } => s.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => s.push_str(variant),
            Segment::Unknown => s.push('?'),
        }
    }
    s
}

/// Parses scenario-file text; errors carry the JSON pointer of the offending value.
pub fn parse_file(text: &str) -> Result<ScenarioFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        schema(pointer, e.into_inner().to_string())
    })?;
    if file.version != SCHEMA_VERSION {
        return Err(schema(
            "/version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", file.version),
        ));
    }
    Ok(file)
}

pub fn load(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|e| GkError::Io(format!("{}: {e}", path.display())))?;
    parse_file(&text)
}

fn expr(chart: &Chart, text: &str, pointer: &str) -> Result<Arc<ExprAst>> {
    chart.parse(text).map(Arc::new).map_err(|e| schema(pointer, e.to_string()))
}

fn kappa_of(spec: &KappaSpec, pointer: &str) -> Result<KappaChoice> {
    match spec {
        KappaSpec::Value(v) if v.is_finite() && *v > 0.0 => Ok(KappaChoice::Fixed(*v)),
        KappaSpec::Value(v) => Err(schema(pointer, format!("kappa must be positive, got {v}"))),
        KappaSpec::Word(w) if w == "auto" || w == "calibrate" => Ok(KappaChoice::Auto),
        KappaSpec::Word(w) => Err(schema(pointer, format!("kappa must be a number, `auto` or `calibrate`, got `{w}`"))),
    }
}

fn unique<'a>(names: impl Iterator<Item = &'a str>, pointer: &str) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for (i, n) in names.enumerate() {
        if !seen.insert(n) {
            return Err(schema(format!("{pointer}/{i}/name"), format!("duplicate name `{n}`")));
        }
    }
    Ok(())
}

fn points(spec: &PointSpec, dim: usize, ov: &Overrides, base_seed: u64, pointer: &str) -> Result<Vec<Vec<f64>>> {
    let seed_of = |s: u64| s.wrapping_add(ov.seed.unwrap_or(base_seed));
    let pts = match spec {
        PointSpec::List(list) => list.clone(),
        PointSpec::Annulus {
            count,
            r_min,
            r_max,
            seed,
            half_width,
        } => {
            if !(0.0 <= *r_min && r_min < r_max) {
                return Err(schema(pointer, format!("annulus needs 0 <= r_min < r_max, got {r_min}, {r_max}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed_of(*seed));
            (0..ov.samples.unwrap_or(*count))
                .map(|_| {
                    let r = rng.random_range(*r_min..*r_max);
                    let t = rng.random_range(0.0..std::f64::consts::TAU);
                    let mut p = vec![r * t.cos(), r * t.sin()];
                    while p.len() < dim {
                        p.push(if *half_width > 0.0 { rng.random_range(-half_width..*half_width) } else { 0.0 });
                    }
                    p
                })
                .collect()
        }
        PointSpec::Box {
            count,
            half_width,
            center,
            seed,
        } => {
            let center = center.clone().unwrap_or_else(|| vec![0.0; dim]);
            SampleBox {
                center,
                half_width: *half_width,
            }
            .sample(ov.samples.unwrap_or(*count), seed_of(*seed))
        }
    };
    for (i, p) in pts.iter().enumerate() {
        if p.len() != dim {
            return Err(schema(
                format!("{pointer}/{i}"),
                format!("point has {} real coordinates, chart needs {dim}", p.len()),
            ));
        }
    }
    Ok(pts)
}

fn tolerances(run: &RunSpec, ov: &Overrides) -> Tolerances {
    let mut tol = Tolerances::default();
    if let Some(t) = run.tol {
        tol = tol.with_global(t);
    }
    for (k, v) in &run.tolerances {
        tol.set(k, *v);
    }
    if let Some(t) = ov.tol {
        tol = tol.with_global(t);
    }
    tol
}

/// Resolves chart references, parses every expression and draws the sample points.
pub fn resolve(file: &ScenarioFile, ov: &Overrides) -> Result<Loaded> {
    unique(file.charts.iter().map(|c| c.name.as_str()), "/charts")?;
    unique(file.scenarios.iter().map(|c| c.name.as_str()), "/scenarios")?;
    unique(file.covers.iter().map(|c| c.name.as_str()), "/covers")?;
    let mut charts: BTreeMap<&str, Arc<Chart>> = BTreeMap::new();
    for (i, c) in file.charts.iter().enumerate() {
        let coords = c
            .coords
            .iter()
            .enumerate()
            .map(|(k, s)| match (&s.re, &s.im) {
                (None, None) => Ok(Coord::new(&s.name, s.role)),
                (Some(re), Some(im)) => Ok(Coord::aliased(&s.name, s.role, re, im)),
                _ => Err(schema(format!("/charts/{i}/coords/{k}"), "give both `re` and `im` or neither")),
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(schema(format!("/charts/{i}/coords"), "chart needs at least one coordinate"));
        }
        let chart = Chart::new(&c.name, coords).map_err(|e| schema(format!("/charts/{i}"), e.to_string()))?;
        charts.insert(&c.name, Arc::new(chart));
    }
    let chart_ref = |name: &str, pointer: String| -> Result<Arc<Chart>> {
        charts.get(name).cloned().ok_or_else(|| GkError::Reference {
            name: name.to_string(),
            pointer,
        })
    };

    let run = &file.run;
    let tol = tolerances(run, ov);
    let kappa = match (&ov.kappa, &run.kappa) {
        (Some(k), _) => *k,
        (None, Some(k)) => kappa_of(k, "/run/kappa")?,
        (None, None) => KappaChoice::Fixed(0.5),
    };
    let base_seed = run.seed.unwrap_or(0);

    let mut scenarios = Vec::new();
    for (i, s) in file.scenarios.iter().enumerate() {
        let at = format!("/scenarios/{i}");
        let chart = chart_ref(&s.chart, format!("{at}/chart"))?;
        let dim = chart.real_dim();
        let mut sc = PotentialScenario::parse(&s.name, (*chart).clone(), s.case, &s.potential)
            .map_err(|e| match e {
                GkError::Precondition(m) => schema(format!("{at}/case"), m),
                other => schema(format!("{at}/potential"), other.to_string()),
            })?;
        let half_width = s.half_width.or(run.half_width).unwrap_or(0.5);
        let samples = ov.samples.or(s.samples).or(run.samples).unwrap_or(100);
        let seed = ov.seed.or(s.seed).unwrap_or(base_seed);
        sc = sc.with_sampling(half_width, samples, seed);
        if let Some(c) = &s.center {
            if c.len() != dim {
                return Err(schema(format!("{at}/center"), format!("center has {} entries, chart needs {dim}", c.len())));
            }
            sc.sample_box.center = c.clone();
        }
        sc.tol = tol.clone();
        if let Some(d) = &s.deformation {
            expr(&chart, &d.phi, &format!("{at}/deformation/phi"))?;
        }
        let leaves = chart.block(crate::charts::Role::LeafQ).len();
        for (j, &a) in s.legendre.iter().enumerate() {
            if a >= leaves {
                return Err(schema(format!("{at}/legendre/{j}"), format!("leaf pair {a} out of range ({leaves} pairs)")));
            }
        }
        scenarios.push(LoadedScenario {
            scenario: sc,
            deformation: s.deformation.clone(),
            legendre: s.legendre.clone(),
        });
    }

    let mut covers = Vec::new();
    for (i, c) in file.covers.iter().enumerate() {
        covers.push(resolve_cover(c, &format!("/covers/{i}"), &chart_ref, &tol, ov, base_seed)?);
    }
    Ok(Loaded {
        scenarios,
        covers,
        kappa,
        tol,
    })
}

fn resolve_cover(
    c: &CoverSpec,
    at: &str,
    chart_ref: &dyn Fn(&str, String) -> Result<Arc<Chart>>,
    tol: &Tolerances,
    ov: &Overrides,
    base_seed: u64,
) -> Result<CoverComplex> {
    unique(c.charts.iter().map(|x| x.name.as_str()), &format!("{at}/charts"))?;
    let mut charts = Vec::new();
    for (k, cc) in c.charts.iter().enumerate() {
        let chart = chart_ref(&cc.chart, format!("{at}/charts/{k}/chart"))?;
        let potential = match &cc.potential {
            Some(p) => Some(expr(&chart, p, &format!("{at}/charts/{k}/potential"))?),
            None => None,
        };
        charts.push(CoverChart {
            name: cc.name.clone(),
            chart,
            potential,
        });
    }
    let index = |name: &str, pointer: String| -> Result<usize> {
        c.charts.iter().position(|x| x.name == name).ok_or_else(|| GkError::Reference {
            name: name.to_string(),
            pointer,
        })
    };
    let indices = |names: &[String], pointer: &str| -> Result<Vec<usize>> {
        let idx = names
            .iter()
            .enumerate()
            .map(|(j, n)| index(n, format!("{pointer}/charts/{j}")))
            .collect::<Result<Vec<_>>>()?;
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != idx.len() {
            return Err(schema(format!("{pointer}/charts"), "overlap lists a chart twice"));
        }
        Ok(idx)
    };
    let opt = |chart: &Chart, e: &Option<String>, pointer: String| -> Result<Option<Arc<ExprAst>>> {
        e.as_deref().map(|t| expr(chart, t, &pointer)).transpose()
    };

    let mut transitions = Vec::new();
    for (k, t) in c.transitions.iter().enumerate() {
        let p = format!("{at}/transitions/{k}");
        let from = index(&t.from, format!("{p}/from"))?;
        let to = index(&t.to, format!("{p}/to"))?;
        let want = charts[to].chart.complex_dim();
        if t.map.len() != want {
            return Err(schema(
                format!("{p}/map"),
                format!("chart `{}` has {want} coordinates, map gives {}", t.to, t.map.len()),
            ));
        }
        let map = t
            .map
            .iter()
            .enumerate()
            .map(|(j, m)| expr(&charts[from].chart, m, &format!("{p}/map/{j}")))
            .collect::<Result<Vec<_>>>()?;
        transitions.push(Transition { from, to, map });
    }

    let mut cover = CoverComplex {
        name: c.name.clone(),
        kind: c.kind,
        charts,
        transitions,
        doubles: Vec::new(),
        triples: Vec::new(),
        quads: Vec::new(),
        chern: None,
        tol: tol.clone(),
    };

    for (k, d) in c.doubles.iter().enumerate() {
        let p = format!("{at}/doubles/{k}");
        let idx = indices(&d.charts, &p)?;
        let chart = cover.charts[idx[0]].chart.clone();
        let pts = points(&d.points, chart.real_dim(), ov, base_seed, &format!("{p}/points"))?;
        let mut points_in = Vec::new();
        for (name, list) in &d.points_in {
            points_in.push((index(name, format!("{p}/points_in/{name}"))?, list.clone()));
        }
        let has_transition = cover.transitions.iter().any(|t| t.from == idx[0] && t.to == idx[1]);
        if has_transition && !points_in.iter().any(|(c, _)| *c == idx[1]) {
            let mapped = pts
                .iter()
                .map(|x| cover.map_point(idx[0], idx[1], x))
                .collect::<Result<Vec<_>>>()?;
            points_in.push((idx[1], mapped));
        }
        cover.doubles.push(DoubleOverlap {
            charts: [idx[0], idx[1]],
            points: pts,
            points_in,
            f: opt(&chart, &d.f, format!("{p}/f"))?,
            g: opt(&chart, &d.g, format!("{p}/g"))?,
            h_plus: opt(&chart, &d.h_plus, format!("{p}/h_plus"))?,
            h_minus: opt(&chart, &d.h_minus, format!("{p}/h_minus"))?,
        });
    }
    for (k, t) in c.triples.iter().enumerate() {
        let p = format!("{at}/triples/{k}");
        let idx = indices(&t.charts, &p)?;
        let chart = cover.charts[idx[0]].chart.clone();
        cover.triples.push(TripleOverlap {
            charts: [idx[0], idx[1], idx[2]],
            points: points(&t.points, chart.real_dim(), ov, base_seed, &format!("{p}/points"))?,
            g: opt(&chart, &t.g, format!("{p}/G"))?,
            f: opt(&chart, &t.f, format!("{p}/F"))?,
        });
    }
    for (k, q) in c.quads.iter().enumerate() {
        let p = format!("{at}/quads/{k}");
        let idx = indices(&q.charts, &p)?;
        let dim = cover.charts[idx[0]].chart.real_dim();
        cover.quads.push(QuadOverlap {
            charts: [idx[0], idx[1], idx[2], idx[3]],
            points: points(&q.points, dim, ov, base_seed, &format!("{p}/points"))?,
        });
    }
    if let Some(ch) = &c.chern {
        let mut pieces = Vec::new();
        for (k, piece) in ch.pieces.iter().enumerate() {
            let p = format!("{at}/chern/pieces/{k}");
            let chart = index(&piece.chart, format!("{p}/chart"))?;
            let weight = opt(&cover.charts[chart].chart, &piece.weight, format!("{p}/weight"))?;
            pieces.push(ChernPiece {
                chart,
                region: piece.region.clone(),
                weight,
            });
        }
        cover.chern = Some(ChernSpec {
            pieces,
            expected: ch.expected,
        });
    }
    Ok(cover)
}
