use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("configuration has {got} entries but the graph has {expected} vertices")]
    SizeMismatch { expected: usize, got: usize },

    #[error("vertex {v} out of range for a graph on {n} vertices")]
    VertexOutOfRange { v: usize, n: usize },

    #[error("operation requires a stable configuration")]
    UnstableInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration needs {required} configurations, over the budget of {budget}")]
    EnumerationBudget { budget: u128, required: u128 },

    #[error("subgraph enumeration over {edges} edges exceeds the budget of {budget}")]
    EdgeBudget { budget: usize, edges: usize },

    #[error("no orbit found within {max_steps} parallel steps")]
    OrbitBudget { max_steps: u64 },

    #[error("estimate requires at least two trials")]
    TooFewTrials,

    #[error("parse error: {0}")]
    Parse(String),
}
