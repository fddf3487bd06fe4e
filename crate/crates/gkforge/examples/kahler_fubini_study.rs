//! Fubini–Study on one chart of CP¹: full battery plus a few metric values.

use gkforge::charts::{Chart, Coord, Role};
use gkforge::gkcore::{run_battery, BatteryOptions};
use gkforge::potentials::{build_kahler, Case, PotentialScenario};

fn main() -> gkforge::Result<()> {
    let chart = Chart::new("line", vec![Coord::new("z", Role::Z)])?;
    let s = PotentialScenario::parse("fubini_study", chart, Case::Kahler, "log(1 + abs2(z))")?.with_sampling(0.8, 100, 1);
    let built = build_kahler(&s)?;

    for p in s.points().iter().take(3) {
        let g = built.bundle.fields(p)?.g.matrix();
        println!("g at ({:+.3}, {:+.3}) = {:.6} (expect {:.6})", p[0], p[1], g[(0, 0)], 2.0 / (1.0 + p[0] * p[0] + p[1] * p[1]).powi(2));
    }

    let report = run_battery(&built.bundle, &s.points(), &BatteryOptions::default())?;
    for l in &report.lines {
        println!("{:4} {:36} {:.2e}", if l.pass { "ok" } else { "FAIL" }, l.name, l.max_abs);
    }
    println!("all passed: {}", report.passed());
    Ok(())
}
