//! Running a scenario file the way `gkforge check` does.

use std::path::PathBuf;

use gkforge::cli::{check_file, Overrides};

fn main() -> gkforge::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/golden.json")
    });
    let ov = Overrides {
        samples: Some(20),
        ..Default::default()
    };
    let report = check_file(&path, &ov)?;
    print!("{}", report.render_text());
    println!("exit code would be {}", report.exit_code());
    Ok(())
}
