//! General case: coupled (z, z′, q, P) potential with non-commuting J±.

use gkforge::charts::{Chart, Coord, Role};
use gkforge::gkcore::{foliation_report, numerical_rank, run_battery, BatteryOptions};
use gkforge::potentials::{build_general, Case, PotentialScenario};

const K: &str = "abs2(z) - abs2(zp) + 2*re(q*P) + 0.5*(abs2(q) + abs2(P)) \
                 + 0.1*re(z*conj(q))*im(conj(zp)*P) + 0.05*re(q*q*conj(P))";

fn main() -> gkforge::Result<()> {
    let chart = Chart::new(
        "mixed",
        vec![
            Coord::new("z", Role::Z),
            Coord::new("zp", Role::ZPrime),
            Coord::new("q", Role::LeafQ),
            Coord::new("P", Role::LeafP),
        ],
    )?;
    let s = PotentialScenario::parse("coupled", chart, Case::General, K)?.with_sampling(0.25, 20, 5);
    let built = build_general(&s)?;
    for l in &built.report.lines {
        println!("{:4} {:22} {:.2e}", if l.pass { "ok" } else { "FAIL" }, l.name, l.max_abs);
    }

    let p = &s.points()[0];
    let geo = built.bundle.geometry(p)?;
    // J± commute on the z/z′ block, so [J+, J−] only sees the leaf.
    let (rank, _) = numerical_rank(&geo.commutator().matrix());
    println!("rank [J+, J-] = {rank} of {}", s.chart.real_dim());

    let fol = foliation_report(&built.bundle, &s.points())?;
    let r = &fol.rows[0];
    println!("ranks: π+ {}, π- {}, σ {}", r.rank_pi_plus, r.rank_pi_minus, r.rank_sigma);

    let report = run_battery(&built.bundle, &s.points(), &BatteryOptions::default())?;
    println!("battery passed: {}", report.passed());
    Ok(())
}
