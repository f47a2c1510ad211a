use thiserror::Error;

/// Errors produced by the models, estimators and parsers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The capital mass cannot support a Pareto tail with exponent above 2.
    #[error(
        "infeasible economy: capital income {m_cap:.6e} EUR must exceed N_cap*x_c = {floor:.6e} EUR"
    )]
    InfeasibleEconomy { m_cap: f64, floor: f64 },

    /// The requested levy leaves too little post-tax mass for a Pareto tail above x_c.
    #[error(
        "infeasible levy: requested {delta_m:.6e} EUR but the maximum feasible levy is {max_delta_m:.6e} EUR (m_cap - N_cap*x_c, exclusive)"
    )]
    InfeasibleLevy { delta_m: f64, max_delta_m: f64 },

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Malformed input text, positioned at a 1-based line and column.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Structurally valid input that violates a data invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
