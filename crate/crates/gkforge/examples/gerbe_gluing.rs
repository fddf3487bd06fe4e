//! Covers from the golden scenario file: CP¹ gluing, Chern number, a four-chart gerbe.

use std::path::Path;

use gkforge::cli::{load, resolve, Overrides};
use gkforge::gerbe::{check_cover, chern_number};

fn main() -> gkforge::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/golden.json");
    let loaded = resolve(&load(&path)?, &Overrides::default())?;
    for cover in &loaded.covers {
        let report = check_cover(cover)?;
        println!("{} ({} charts): passed {}", cover.name, cover.charts.len(), report.passed());
        for l in &report.lines {
            println!("  {:24} {:.2e}", l.name, l.max_abs);
        }
        if cover.chern.is_some() {
            println!("  Chern number {:.9}", chern_number(cover)?);
        }
    }
    Ok(())
}
