//! Deforming a potential by tφ and finding how far t can go.

use gkforge::charts::{Chart, Coord, Role};
use gkforge::gkcore::{run_battery, BatteryOptions};
use gkforge::potentials::{deform, positivity_radius, Case, PotentialScenario};

fn main() -> gkforge::Result<()> {
    let chart = Chart::new("plane2", vec![Coord::new("z", Role::Z), Coord::new("zp", Role::ZPrime)])?;
    let s = PotentialScenario::parse("flat", chart, Case::Commuting, "abs2(z) - abs2(zp)")?.with_sampling(0.5, 40, 8);
    let phi = "abs2(z)*abs2(zp)";

    let radius = positivity_radius(&s, phi, 50.0)?;
    println!("g stays positive for t in (-{:.4}, {:.4})", radius.negative, radius.positive);

    for t in [0.1, 0.5 * radius.positive] {
        let d = deform(&s, phi, t)?;
        let opts = BatteryOptions {
            product: true,
            ..Default::default()
        };
        let report = run_battery(&d.built.bundle, &s.points(), &opts)?;
        println!("t = {t:.4}: battery passed {}, path gap {:.1e}", report.passed(), d.path_gap);
    }
    match deform(&s, phi, 1.5 * radius.positive) {
        Ok(_) => println!("past the radius: still built"),
        Err(e) => println!("past the radius: {e}"),
    }
    Ok(())
}
