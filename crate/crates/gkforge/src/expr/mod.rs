//! Expression language and truncated-jet differentiation.

mod ast;
mod eval;
mod jet;
mod parser;
mod wirtinger;

pub use ast::{ExprAst, Op};
pub use jet::{Jet, JetSpace, MAX_ORDER};
pub use parser::{parse, real_var_names, CoordSpec};
pub use wirtinger::{wirtinger_chain, wirtinger_derivative, CJet, Slot, WirtingerTable};
