//! Structured errors shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrimformError {
    #[error("scalar is not invertible (multi-term or zero): {0}")]
    NonInvertibleScalar(String),

    #[error("leading coefficient is not invertible in the coefficient field: {0}")]
    NonInvertibleLeading(String),

    #[error("division by zero polynomial")]
    DivisionByZero,

    #[error("exact division failed: {0}")]
    InexactDivision(String),

    #[error("non-isolated singularity: rewrite did not terminate within degree bound {0}")]
    NonIsolated(usize),

    #[error("degenerate Gram matrix: {0}")]
    DegenerateGram(String),

    #[error("flat-coordinate solver failed at order {order}: {detail}")]
    FlatSolver { order: usize, detail: String },

    #[error("integrability violation: {0}")]
    Integrability(String),

    #[error("log obstruction in nabla_delta0_inverse: obstructing residue {0}")]
    LogObstruction(String),

    #[error("caps exceeded: {0}")]
    CapsExceeded(String),

    #[error("inconsistent PDE system while solving deformed flat function: {0}")]
    InconsistentPde(String),

    #[error("spec file error: {0}")]
    SpecFile(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}
