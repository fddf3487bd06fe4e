//! Chart-local tensor calculus.

mod brackets;
mod chart;
mod connection;
mod field;
mod forms;
mod tensor;

pub use brackets::{nijenhuis, nijenhuis_torsion, schouten};
pub use chart::{standard_structure, Chart, Coord, Role};
pub use connection::{christoffel, covariant_deriv_j, metric_compatibility, metric_inverse, raised_torsion};
pub use field::{Component, PointFrame, Symmetry, TensorField};
pub use forms::{
    bidegree_parts, bidegree_project, dc_jets, dc_project, exterior_d, permutations, projectors,
    square_residual, wedge,
};
pub use tensor::{condition_number, max_abs, multi_indices, JetTensor, Tensor};
