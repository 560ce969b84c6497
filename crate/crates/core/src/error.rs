use thiserror::Error;

/// Errors produced by the optimizer, the objective registry and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("objective `{objective}` returned non-finite value {value} at point {point:?}")]
    NonFinite {
        objective: String,
        point: Vec<f64>,
        value: f64,
    },

    #[error("unknown objective `{name}` (available: {})", available.join(", "))]
    UnknownObjective {
        name: String,
        available: Vec<String>,
    },

    #[error("objective `{0}` has no known optimum")]
    MissingOptimum(String),

    #[error("evaluation budget exceeded: {requested} grid points requested, budget is {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
