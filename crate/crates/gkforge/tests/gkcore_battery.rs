mod common;

use common::*;
use gkforge::charts::{exterior_d, Chart, Coord, Role};
use gkforge::gkcore::{calibrate_kappa, foliation_report, run_battery, BatteryOptions, KappaChoice};
use gkforge::potentials::{build_commuting, build_general, build_kahler, build_symplectic, Built, Case, PotentialScenario};

fn golden() -> Vec<(PotentialScenario, fn(&PotentialScenario) -> gkforge::Result<Built>)> {
    vec![
        (scenario("flat", line(), Case::Kahler, "abs2(z)", 0.5, 100, 1), build_kahler as _),
        (scenario("fs", line(), Case::Kahler, "log(1 + abs2(z))", 0.5, 100, 2), build_kahler as _),
        (scenario("comm", plane2(), Case::Commuting, COMMUTING_GOLDEN, 0.5, 100, 3), build_commuting as _),
        (scenario("symp", leaf(), Case::Symplectic, SYMPLECTIC_GOLDEN, 0.3, 100, 4), build_symplectic as _),
        (scenario("gen", mixed(), Case::General, GENERAL_COUPLED, 0.25, 100, 5), build_general as _),
    ]
}

#[test]
fn every_constructed_bundle_passes_the_battery() {
    for (s, build) in golden() {
        let b = build(&s).unwrap();
        let opts = BatteryOptions {
            product: s.case == Case::Commuting,
            ..Default::default()
        };
        let r = run_battery(&b.bundle, &s.points(), &opts).unwrap();
        assert!(r.passed(), "{}: {:?}", s.name, r.failures());
        assert!(b.report.passed(), "{}: {:?}", s.name, b.report.failures());
        assert!(r.lines.iter().all(|l| l.samples == 100 || l.name == "poisson.mixed_spread"));
    }
}

#[test]
fn scaling_the_metric_rescales_forms_and_bivectors() {
    let s = scenario("comm", plane2(), Case::Commuting, COMMUTING_GOLDEN, 0.5, 10, 8);
    let b = build_commuting(&s).unwrap().bundle;
    let b2 = b.scaled(2.0);
    for p in s.points() {
        let (g1, g2) = (b.geometry(&p).unwrap(), b2.geometry(&p).unwrap());
        for plus in [true, false] {
            assert!(g1.j(plus).value().dist(&g2.j(plus).value()) < 1e-15);
            assert!(g1.omega(plus).value().scale(2.0).dist(&g2.omega(plus).value()) < 1e-13);
            assert!(g1.pi(plus).value().scale(0.5).dist(&g2.pi(plus).value()) < 1e-13);
        }
        assert!(g1.h().unwrap().scale(2.0).dist(&g2.h().unwrap()) < 1e-12);
        assert!(g1.sigma().value().scale(0.5).dist(&g2.sigma().value()) < 1e-13);
    }
}

#[test]
fn kahler_limit_has_no_torsion_or_twisting() {
    let s = scenario("fs", line(), Case::Kahler, "log(1 + abs2(z))", 0.8, 50, 21);
    let b = build_kahler(&s).unwrap().bundle;
    for p in s.points() {
        let g = b.geometry(&p).unwrap();
        assert!(g.h().unwrap().max_abs() <= 1e-10);
        assert!(g.sigma().value().max_abs() <= 1e-10);
        assert!(g.pi(false).value().max_abs() <= 1e-10);
        assert!(exterior_d(g.omega(true)).unwrap().value().max_abs() <= 1e-10);
    }
}

#[test]
fn reports_are_deterministic() {
    let s = scenario("comm", plane2(), Case::Commuting, COMMUTING_GOLDEN, 0.5, 40, 5);
    let b = build_commuting(&s).unwrap();
    let opts = BatteryOptions {
        kappa: KappaChoice::Auto,
        product: true,
        ..Default::default()
    };
    let a = run_battery(&b.bundle, &s.points(), &opts).unwrap();
    let c = run_battery(&b.bundle, &s.points(), &opts).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
}

#[test]
fn calibration_rejects_the_wrong_torsion_coefficient() {
    let s = scenario("comm", plane2(), Case::Commuting, COMMUTING_GOLDEN, 0.5, 50, 6);
    let b = build_commuting(&s).unwrap();
    let cal = calibrate_kappa(&b.bundle, &s.points()).unwrap();
    assert_eq!(cal.kappa, 0.5);
    for (k, r) in cal.candidates {
        if k == 0.5 {
            assert!(r <= 1e-7);
        } else {
            assert!(r > 1e-3, "kappa {k}: {r}");
        }
    }
}

#[test]
fn flat_two_by_two_commuting_ranks() {
    let chart = Chart::new(
        "c4",
        vec![
            Coord::new("z1", Role::Z),
            Coord::new("z2", Role::Z),
            Coord::new("w1", Role::ZPrime),
            Coord::new("w2", Role::ZPrime),
        ],
    )
    .unwrap();
    let s = scenario("flat4", chart, Case::Commuting, "abs2(z1) + abs2(z2) - abs2(w1) - abs2(w2)", 0.5, 8, 2);
    let b = build_commuting(&s).unwrap();
    let f = foliation_report(&b.bundle, &s.points()).unwrap();
    assert!(!f.rank_jumps);
    for row in f.rows {
        assert_eq!((row.rank_pi_plus, row.rank_pi_minus, row.rank_sigma), (4, 4, 0));
    }
}
