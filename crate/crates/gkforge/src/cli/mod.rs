//! Scenario files in, reports out.

mod load;
mod run;
mod schema;

use std::path::Path;

pub use load::{load, parse_file, resolve, Loaded, LoadedScenario, Overrides};
pub use run::{calibrate, render_calibration, run, with_thread_cap, CalibrationRow, ItemResult, RunReport};
pub use schema::*;

use crate::error::Result;

/// Loads, resolves and runs a scenario file.
pub fn check_file(path: &Path, ov: &Overrides) -> Result<RunReport> {
    let file = load(path)?;
    let loaded = resolve(&file, ov)?;
    Ok(run(&loaded))
}
