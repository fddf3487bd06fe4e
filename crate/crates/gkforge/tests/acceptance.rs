//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::*;
use gkforge::cli::{parse_file, resolve, Overrides};
use gkforge::gerbe::{check_cover, chern_number, CoverComplex};
use gkforge::gkcore::{run_battery, BatteryOptions, CheckReport, KappaChoice};
use gkforge::potentials::{build_commuting, build_general, build_kahler, build_symplectic, Case};
use nalgebra::DMatrix;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Every named line at or below `tol`.
fn lines_within(r: &CheckReport, prefix: &str, tol: f64) -> Result<f64, String> {
    let mut worst = 0.0f64;
    let mut seen = false;
    for l in r.lines.iter().filter(|l| l.name.starts_with(prefix)) {
        seen = true;
        worst = worst.max(l.max_rel);
        ensure(l.max_rel <= tol, format!("{} = {:.3e} > {tol:.0e}", l.name, l.max_rel))?;
    }
    ensure(seen, format!("no `{prefix}` lines"))?;
    Ok(worst)
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios").join(name)
}

fn golden_json() -> Value {
    serde_json::from_str(&std::fs::read_to_string(scenario_path("golden.json")).unwrap()).unwrap()
}

fn covers_of(v: &Value) -> Vec<CoverComplex> {
    let file = parse_file(&v.to_string()).unwrap();
    resolve(&file, &Overrides::default()).unwrap().covers
}

fn cover_named(v: &Value, name: &str) -> CoverComplex {
    covers_of(v).into_iter().find(|c| c.name == name).unwrap()
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

fn kahler_suite() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (name, k) in [("flat", "abs2(z)"), ("fubini_study", "log(1 + abs2(z))")] {
        let s = scenario(name, line(), Case::Kahler, k, 0.8, 100, 1);
        let b = build_kahler(&s).map_err(|e| e.to_string())?;
        let r = run_battery(&b.bundle, &s.points(), &BatteryOptions::default()).map_err(|e| e.to_string())?;
        ensure(r.passed(), format!("{name}: {:?}", r.failures()))?;
        for l in r.lines.iter().filter(|l| l.tol > 0.0) {
            ensure(l.max_rel <= 1e-9, format!("{name}: {} = {:.3e}", l.name, l.max_rel))?;
            worst = worst.max(l.max_rel);
        }
        for p in s.points() {
            let d = gkforge::charts::exterior_d(b.bundle.geometry(&p).unwrap().omega(true)).unwrap();
            ensure(d.value().max_abs() <= 1e-9, format!("{name}: dω = {:.3e}", d.value().max_abs()))?;
        }
    }
    let cp1 = cover_named(&golden_json(), "cp1");
    let chern = chern_number(&cp1).map_err(|e| e.to_string())?;
    ensure((chern - 1.0).abs() <= 1e-6, format!("Chern number {chern}"))?;
    let t = start.elapsed().as_secs_f64();
    ensure(t < 5.0, format!("runtime {t:.2} s"))?;
    Ok(format!("max residual {worst:.2e}, Chern {chern:.9}, {t:.2} s"))
}

fn commuting_suite() -> Outcome {
    let start = Instant::now();
    let s = scenario("commuting_golden", plane2(), Case::Commuting, COMMUTING_GOLDEN, 0.5, 100, 2);
    let b = build_commuting(&s).map_err(|e| e.to_string())?;
    let opts = BatteryOptions {
        kappa: KappaChoice::Auto,
        product: true,
        ..Default::default()
    };
    let r = run_battery(&b.bundle, &s.points(), &opts).map_err(|e| e.to_string())?;
    let gk = lines_within(&r, "gk.", 1e-8)?;
    lines_within(&r, "gk.h_supplied", 1e-10)?;
    lines_within(&b.report, "build.h_formula", 1e-10)?;
    lines_within(&r, "gk.ddc_plus", 1e-8)?;
    let bismut = lines_within(&r, "bismut.", 1e-7)?;
    lines_within(&r, "poisson.pi_plus_self", 1e-8)?;
    lines_within(&r, "poisson.pi_minus_self", 1e-8)?;
    let product = lines_within(&r, "product.", 1e-8)?;
    let mut sigma = 0.0f64;
    for p in s.points() {
        sigma = sigma.max(b.bundle.geometry(&p).unwrap().sigma().value().max_abs());
    }
    ensure(sigma <= 1e-12, format!("σ = {sigma:.3e}"))?;
    let t = start.elapsed().as_secs_f64();
    ensure(t < 10.0, format!("runtime {t:.2} s"))?;
    Ok(format!(
        "gk {gk:.2e}, bismut {bismut:.2e} (kappa {}), σ {sigma:.2e}, product {product:.2e}, {t:.2} s",
        r.conventions.kappa
    ))
}

fn symplectic_suite() -> Outcome {
    let s = scenario("symplectic", leaf(), Case::Symplectic, SYMPLECTIC_GOLDEN, 0.3, 50, 3);
    let b = build_symplectic(&s).map_err(|e| e.to_string())?;
    lines_within(&b.report, "build.j_square", 1e-10)?;
    lines_within(&b.report, "build.closed", 1e-9)?;
    lines_within(&b.report, "build.sigma_roundtrip", 1e-8)?;
    lines_within(&b.report, "build.pushforward", 1e-8)?;
    let r = run_battery(&b.bundle, &s.points(), &BatteryOptions::default()).map_err(|e| e.to_string())?;
    for name in [
        "structure.metric_symmetric",
        "structure.hermitian_plus",
        "structure.hermitian_minus",
        "structure.metric_positive",
    ] {
        let l = r.get(name).ok_or(format!("missing {name}"))?;
        ensure(l.pass, format!("{name} failed"))?;
    }
    let spread = r.get("poisson.mixed_spread").ok_or("missing spread")?;
    ensure(spread.samples == 50 && spread.max_rel < 1e-6, format!("spread {:.3e}", spread.max_rel))?;
    Ok(format!(
        "j² {:.2e}, closed {:.2e}, round-trip {:.2e}, pushforward {:.2e}, spread {:.2e}",
        b.report.max_abs("build.j_square"),
        b.report.max_abs("build.closed"),
        b.report.max_abs("build.sigma_roundtrip"),
        b.report.max_abs("build.pushforward"),
        spread.max_rel
    ))
}

fn general_suite() -> Outcome {
    let (kc, ks) = (COMMUTING_GOLDEN, SYMPLECTIC_GOLDEN);
    let s = scenario("product", mixed(), Case::General, &format!("{kc} + {ks}"), 0.3, 30, 4);
    let gen = build_general(&s).map_err(|e| e.to_string())?.bundle;
    let comm = build_commuting(&scenario("c", plane2(), Case::Commuting, kc, 0.3, 1, 0)).unwrap().bundle;
    let symp = build_symplectic(&scenario("s", leaf(), Case::Symplectic, ks, 0.3, 1, 0)).unwrap().bundle;
    let mut oracle = 0.0f64;
    for p in s.points() {
        let f = gen.fields(&p).unwrap();
        let a = comm.fields(&p[..4]).unwrap();
        let b = symp.fields(&p[4..]).unwrap();
        for (got, want) in [
            (f.g.matrix(), block_diag(&a.g.matrix(), &b.g.matrix())),
            (f.j_plus.matrix(), block_diag(&a.j_plus.matrix(), &b.j_plus.matrix())),
            (f.j_minus.matrix(), block_diag(&a.j_minus.matrix(), &b.j_minus.matrix())),
        ] {
            oracle = oracle.max((got - want).abs().max());
        }
    }
    ensure(oracle <= 1e-10, format!("block oracle {oracle:.3e}"))?;
    let c = scenario("coupled", mixed(), Case::General, GENERAL_COUPLED, 0.25, 30, 5);
    let built = build_general(&c).map_err(|e| e.to_string())?;
    let compat = lines_within(&built.report, "build.compat", 1e-8)?;
    let dual = lines_within(&built.report, "build.g_dual", 1e-8)?;
    Ok(format!("block oracle {oracle:.2e}, compat {compat:.2e}, g dual {dual:.2e}"))
}

fn degenerations() -> Outcome {
    let mut worst = 0.0f64;
    for (chart, case, k) in [
        (plane2(), Case::Commuting, COMMUTING_GOLDEN),
        (leaf(), Case::Symplectic, SYMPLECTIC_GOLDEN),
    ] {
        let special = scenario("s", chart.clone(), case, k, 0.3, 30, 6);
        let general = scenario("g", chart, Case::General, k, 0.3, 30, 6);
        let a = match case {
            Case::Commuting => build_commuting(&special),
            _ => build_symplectic(&special),
        }
        .map_err(|e| e.to_string())?
        .bundle;
        let b = build_general(&general).map_err(|e| e.to_string())?.bundle;
        for p in special.points() {
            let (fa, fb) = (a.fields(&p).unwrap(), b.fields(&p).unwrap());
            for (x, y) in [(&fa.g, &fb.g), (&fa.j_plus, &fb.j_plus), (&fa.j_minus, &fb.j_minus)] {
                worst = worst.max((x.matrix() - y.matrix()).abs().max());
            }
        }
    }
    ensure(worst <= 1e-12, format!("degeneration gap {worst:.3e}"))?;
    let s = scenario("fs", line(), Case::Kahler, "log(1 + abs2(z))", 0.8, 50, 7);
    let b = build_kahler(&s).unwrap().bundle;
    let mut limit = 0.0f64;
    for p in s.points() {
        let g = b.geometry(&p).unwrap();
        limit = limit
            .max(g.h().unwrap().max_abs())
            .max(g.sigma().value().max_abs())
            .max(g.pi(false).value().max_abs());
    }
    ensure(limit <= 1e-10, format!("Kähler limit {limit:.3e}"))?;
    Ok(format!("degeneration gap {worst:.2e}, Kähler limit {limit:.2e}"))
}

/// Edits one string field of a golden cover and returns the named residual.
fn planted(cover: &str, section: &str, index: usize, field: &str, edit: &dyn Fn(&str) -> String, check: &str) -> f64 {
    let mut v = golden_json();
    let c = v["covers"].as_array_mut().unwrap().iter_mut().find(|c| c["name"] == cover).unwrap();
    let slot = &mut c[section][index][field];
    *slot = json!(edit(slot.as_str().unwrap()));
    let r = check_cover(&cover_named(&v, cover)).unwrap();
    r.get(check).unwrap().max_abs
}

fn gerbe_suite() -> Outcome {
    let v = golden_json();
    let cp1 = check_cover(&cover_named(&v, "cp1")).map_err(|e| e.to_string())?;
    let glue = lines_within(&cp1, "gluing.", 1e-10)?;
    let toy = check_cover(&cover_named(&v, "toy_gerbe")).map_err(|e| e.to_string())?;
    let delta = lines_within(&toy, "gerbe.cocycle", 1e-12)?;
    ensure(toy.passed(), format!("{:?}", toy.failures()))?;
    let size = 0.01;
    let cases: [(&str, &str, &str, &dyn Fn(&str) -> String, &str); 4] = [
        ("cp1", "doubles", "f", &|s| format!("{s} + 0.01*conj(z)"), "gluing.holomorphic"),
        ("toy_gerbe", "triples", "G", &|s| format!("{s}*exp(0.01*conj(z))"), "gerbe.G_holomorphic"),
        ("toy_gerbe", "triples", "G", &|s| format!("1.01*{s}"), "gerbe.cocycle_G"),
        ("toy_gerbe", "doubles", "h_plus", &|s| format!("1.01*{s}"), "gerbe.hermitian_plus"),
    ];
    let mut seen = Vec::new();
    for (cover, section, field, edit, check) in cases {
        let m = planted(cover, section, 0, field, edit, check);
        ensure(m >= size / 2.0 && m <= size * 2.0, format!("{check}: planted {size}, reported {m:.3e}"))?;
        seen.push(format!("{check} {m:.2e}"));
    }
    Ok(format!("CP¹ gluing {glue:.2e}, δ {delta:.2e}; planted 1e-2: {}", seen.join(", ")))
}

fn jets_vs_fd() -> Outcome {
    let (mut o1, mut o34) = (0.0f64, 0.0f64);
    for seed in 0..200 {
        let (text, ast, x) = random_pair(10_000 + seed);
        let e = fd_errors(&ast, &x);
        ensure(e.order1 <= 1e-6, format!("order 1 {:.3e} on {text}", e.order1))?;
        ensure(e.order34 <= 1e-4, format!("order 3-4 {:.3e} on {text}", e.order34))?;
        o1 = o1.max(e.order1);
        o34 = o34.max(e.order34);
    }
    Ok(format!("200 pairs, order 1 {o1:.2e}, orders 3-4 {o34:.2e}"))
}

fn determinism_and_exit_codes() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_gkforge");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |file: &str, json: Option<&Path>, threads: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.arg("check").arg(scenario_path(file)).env_remove("GKFORGE_THREADS");
        if let Some(j) = json {
            cmd.arg("--json").arg(j);
        }
        if let Some(t) = threads {
            cmd.env("GKFORGE_THREADS", t);
        }
        let out = cmd.output().unwrap();
        (out.status.code(), out.stdout)
    };
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let first = run("golden.json", Some(&a), None);
    let second = run("golden.json", Some(&b), Some("1"));
    ensure(first.0 == Some(0), format!("golden exit {:?}", first.0))?;
    ensure(first == second, "stdout differs between runs")?;
    ensure(std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap(), "JSON differs between runs")?;
    for (file, want) in [("planted_gerbe.json", 1), ("broken_bihermitian.json", 1), ("malformed.json", 2)] {
        let code = run(file, None, None).0;
        ensure(code == Some(want), format!("{file}: exit {code:?}, expected {want}"))?;
    }
    Ok("byte-identical reports; exits 0/1/1/2".into())
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 kahler suite", kahler_suite),
        ("2 commuting construction", commuting_suite),
        ("3 symplectic construction", symplectic_suite),
        ("4 general construction", general_suite),
        ("5 degeneration chain", degenerations),
        ("6 gerbe suite", gerbe_suite),
        ("7 jets vs finite differences", jets_vs_fd),
        ("8 determinism and exit codes", determinism_and_exit_codes),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    let total = start.elapsed().as_secs_f64();
    if total >= 60.0 {
        failed += 1;
        println!("FAIL total runtime {total:.1} s (limit 60 s)");
    } else {
        println!("total runtime {total:.1} s");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
