//! Symplectic case: a generating function in (q, P) and a change of polarization.

use gkforge::charts::{Chart, Coord, Role};
use gkforge::gkcore::{run_battery, BatteryOptions};
use gkforge::potentials::{build_symplectic, legendre_map, legendre_transform, Case, PotentialScenario};

fn main() -> gkforge::Result<()> {
    let chart = Chart::new("leaf", vec![Coord::new("q", Role::LeafQ), Coord::new("P", Role::LeafP)])?;
    let k = "2*re(q*P) + 0.5*(abs2(q) + abs2(P)) + 0.05*re(q*q*conj(P))";
    let s = PotentialScenario::parse("symplectic", chart, Case::Symplectic, k)?.with_sampling(0.3, 50, 3);

    let built = build_symplectic(&s)?;
    for l in &built.report.lines {
        println!("{:4} {:26} {:.2e}", if l.pass { "ok" } else { "FAIL" }, l.name, l.max_abs);
    }
    let report = run_battery(&built.bundle, &s.points(), &BatteryOptions::default())?;
    let spread = report.get("poisson.mixed_spread").expect("battery reports the spread");
    println!("battery passed: {}, [π+, π−] spread {:.2e}", report.passed(), spread.max_rel);

    let swapped = legendre_transform(&s, &[0])?;
    let again = build_symplectic(&swapped)?;
    let report = run_battery(&again.bundle, &swapped.points(), &BatteryOptions::default())?;
    println!("after swapping q with P: battery passed {}", report.passed());
    let (y, jac) = legendre_map(&s, &[0], &s.points()[0])?;
    println!("first point maps to {y:.4?}, det D = {:.6}", jac.determinant());
    Ok(())
}
