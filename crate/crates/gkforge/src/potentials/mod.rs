//! Potential-to-geometry constructions.

mod cforms;
mod deform;
mod hessian;
mod legendre;
mod polar;
mod general;
mod scenario;
mod symplectic;

use std::sync::Arc;

pub use cforms::{one_form, real_form};
pub use hessian::{build_commuting, build_kahler, hessian_forms};
pub use scenario::{Case, Deformation, ExprPotential, Potential, PotentialScenario, SumPotential};
pub use deform::{deform, positivity_radius, Deformed, PositivityRadius, RADIUS_RESOLUTION};
pub use general::build_general;
pub use legendre::{legendre_map, legendre_transform, LegendrePotential, NEWTON_MAX_ITER, NEWTON_TOL};
pub use symplectic::build_symplectic;

use crate::gkcore::{CheckReport, StructureBundle};

/// A constructed bundle plus the checks run while building it.
#[derive(Clone, Debug)]
pub struct Built {
    pub bundle: StructureBundle,
    pub report: CheckReport,
}

/// The scenario potential with its deformation (if any) folded in.
pub(crate) fn effective_potential(s: &PotentialScenario) -> Arc<dyn Potential> {
    match &s.deformation {
        None => s.potential.clone(),
        Some(d) => Arc::new(SumPotential(vec![
            (1.0, s.potential.clone()),
            (d.t, Arc::new(ExprPotential(d.phi.clone()))),
        ])),
    }
}
