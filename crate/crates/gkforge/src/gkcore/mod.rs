//! Structure bundles `(J±, g, H)` and the generalized Kähler check battery.

mod bundle;
pub(crate) mod report;
mod sampling;
mod verify;

pub use bundle::{FieldSet, FieldSource, PointFields, PointGeometry, StructureBundle};
pub use report::{CheckLine, CheckReport, Conventions, Tolerances};
pub use sampling::{map_points, SampleBox};
pub use verify::{
    bismut_on, calibrate_kappa, calibrate_on, foliation_on, foliation_report, geometries, gk_on,
    integrability_on, numerical_rank, poisson_on, product_on, run_battery, structure_on,
    verify_bismut, verify_gk_conditions, verify_poisson_family, verify_pointwise_structure,
    verify_product_structure, BatteryOptions, Calibration, FoliationReport, FoliationRow,
    KappaChoice, KAPPA_CANDIDATES,
};
