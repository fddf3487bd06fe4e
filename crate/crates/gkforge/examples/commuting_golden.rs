//! Commuting case: J± from a potential in (z, z′), torsion, and κ calibration.

use gkforge::charts::{Chart, Coord, Role};
use gkforge::gkcore::{calibrate_kappa, run_battery, BatteryOptions, KappaChoice};
use gkforge::potentials::{build_commuting, Case, PotentialScenario};

const K: &str = "abs2(z) - abs2(zp) + 0.1*re(z*zp)*im(z*conj(zp)) + 0.05*re(z*z*conj(z)*zp)";

fn main() -> gkforge::Result<()> {
    let chart = Chart::new("plane2", vec![Coord::new("z", Role::Z), Coord::new("zp", Role::ZPrime)])?;
    let s = PotentialScenario::parse("commuting", chart, Case::Commuting, K)?.with_sampling(0.5, 50, 2);
    let built = build_commuting(&s)?;

    let p = &s.points()[0];
    let geo = built.bundle.geometry(p)?;
    println!("J+ =\n{:.4}", geo.j(true).matrix());
    println!("J- =\n{:.4}", geo.j(false).matrix());
    println!("|H| at first point = {:.3e}", geo.h()?.max_abs());

    let cal = calibrate_kappa(&built.bundle, &s.points())?;
    for (kappa, r) in &cal.candidates {
        println!("kappa {kappa}: max |∇J| = {r:.3e}");
    }

    let opts = BatteryOptions {
        kappa: KappaChoice::Auto,
        product: true,
        ..Default::default()
    };
    let report = run_battery(&built.bundle, &s.points(), &opts)?;
    println!("battery passed: {} (kappa {})", report.passed(), report.conventions.kappa);
    for prefix in ["gk.", "bismut.", "product.", "poisson."] {
        println!("  worst {prefix:10} {:.2e}", report.max_abs(prefix));
    }
    Ok(())
}
