//! Chart-local construction and numerical verification of generalized Kähler
//! structures from scalar potentials.

pub mod error;
pub mod charts;
pub mod expr;
pub mod gkcore;
pub mod potentials;
pub mod gerbe;
pub mod cli;

pub use error::{GkError, Result};
