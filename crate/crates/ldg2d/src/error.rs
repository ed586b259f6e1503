//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid boundary data: {0}")]
    InvalidBoundary(String),

    #[error(
        "field does not match the Dirichlet trace: max deviation {max_dev:.3e} at node ({i}, {j})"
    )]
    BoundaryMismatch { max_dev: f64, i: usize, j: usize },

    #[error("perturbation does not conform to the field: {0}")]
    NonConforming(String),

    #[error("Newton did not converge: {iterations} iterations, residual {residual:.3e}")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular linearization (pivot {pivot:.3e} at row {row})")]
    SingularLinearization { pivot: f64, row: usize },

    #[error(
        "gradient flow unstable: energy increased over {0} consecutive checks after dt reductions"
    )]
    StepUnstable(usize),

    #[error("field is not an equilibrium: residual {residual:.3e} exceeds {tol:.3e}")]
    NotAnEquilibrium { residual: f64, tol: f64 },

    #[error("series tolerance {tol:.3e} unreachable within {kmax} terms (tail bound {tail:.3e})")]
    ToleranceUnreachable { tol: f64, kmax: usize, tail: f64 },

    #[error("seed is not converged: residual {0:.3e}")]
    SeedNotConverged(f64),

    #[error("transition {0} not present in the supplied branches")]
    MissingTransition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed field file: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
