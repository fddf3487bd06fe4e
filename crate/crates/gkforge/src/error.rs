use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// Variants carry enough context to locate the failure (byte offsets for
/// parse errors, point coordinates for numerical failures, block names for
/// regularity failures).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GkError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error in `{node}`: {message}")]
    Domain { node: String, message: String },

    #[error("jet order exceeded: need order {needed}, have {available}")]
    OrderExceeded { needed: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid structure: {what} (residual {residual:.3e})")]
    InvalidStructure { what: String, residual: f64 },

    #[error("form is not of type (1,1): component {component:?} has off-type residual {residual:.3e}")]
    NotType11 { component: Vec<usize>, residual: f64 },

    #[error("degenerate {what} (condition number {condition:.3e})")]
    Degenerate { what: String, condition: f64 },

    #[error("metric not positive-definite at {point:?}: smallest eigenvalue {eigenvalue:.6e}")]
    Positivity { point: Vec<f64>, eigenvalue: f64 },

    #[error("internal convention mismatch in {what}: residual {residual:.3e}")]
    Convention { what: String, residual: f64 },

    #[error("regularity failure: block {block} is singular at {point:?} (condition number {condition:.3e})")]
    Regularity {
        block: String,
        point: Vec<f64>,
        condition: f64,
    },

    #[error("polarization degeneracy: {block} singular (condition number {condition:.3e})")]
    PolarizationDegeneracy { block: String, condition: f64 },

    #[error("invalid potential: {reason}")]
    InvalidPotential { reason: String },

    #[error("integrability pre-check failed: {what} Nijenhuis residual {residual:.3e} at {point:?}")]
    NotIntegrable {
        what: String,
        residual: f64,
        point: Vec<f64>,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("inner solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("cover error: {0}")]
    Cover(String),

    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("unresolved reference `{name}` at {pointer}")]
    Reference { name: String, pointer: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<GkError>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl GkError {
    /// Wraps the error with a label, e.g. the scenario name.
    pub fn context(self, context: impl Into<String>) -> Self {
        GkError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error after stripping context wrappers.
    pub fn root(&self) -> &GkError {
        match self {
            GkError::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = GkError> = std::result::Result<T, E>;
