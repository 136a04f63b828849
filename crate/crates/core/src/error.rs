use thiserror::Error;

/// Errors raised by state construction, bound evaluation and protocol simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` = {value} outside its allowed range {range}")]
    Domain { name: &'static str, value: f64, range: &'static str },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("party index {index} out of range for {parties} parties")]
    PartyIndex { index: usize, parties: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state is not in the GHZ class: {0}")]
    NotGhzClass(String),

    #[error("branch has zero probability on the given state")]
    ZeroProbability,

    #[error("measurement is incomplete: completeness residual {residual:e} exceeds {tolerance:e}")]
    Incomplete { residual: f64, tolerance: f64 },

    #[error("success branch does not map product terms onto product terms (residual {0:e})")]
    StructuralViolation(f64),

    #[error("ill-conditioned operator: smallest eigenvalue {0:e}")]
    IllConditioned(f64),

    #[error("oracle found no feasible sample for interference {0}")]
    Infeasible(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
