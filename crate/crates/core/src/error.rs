use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |H - H^dag| = {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("eigenvalue {eigenvalue:e} outside the domain of the matrix function")]
    Domain { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("supplied vector is not orthogonal to |sqrt(rho)> (overlap {overlap:e})")]
    NotOrthogonal { overlap: f64 },

    #[error("inner-product angle is undefined")]
    InvalidAngle,

    #[error("uncertainty matrix is degenerate (tr K = {trace:e})")]
    DegenerateK { trace: f64 },

    #[error("parameter out of range: {0}")]
    Param(String),

    #[error("no solution found (best residual {best_residual:e})")]
    NoSolution { best_residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("integration diverged at t = {time}: {reason}")]
    IntegrationDiverged { time: f64, reason: String },

    #[error("real qubit state required (|r_y| = {r_y:e})")]
    RealStateRequired { r_y: f64 },

    #[error("invalid scenario: {0}")]
    Scenario(String),
}

pub type Result<V, E = Error> = std::result::Result<V, E>;
