use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rho0 = {rho0} lies outside the entropy datum domain {domain}")]
    Domain { rho0: f64, domain: String },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("pressure is undetermined for a nilpotent representation (epsilon_tilde = 0)")]
    UnsupportedRepresentation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate frame: C_theta vanishes at theta = {theta}")]
    DegenerateFrame { theta: f64 },

    #[error("velocity {u} is out of range (|u| must stay below c = {c})")]
    OutOfRange { u: f64, c: f64 },

    #[error("state (rho = {rho}, J = {j}) is outside the validity domain: {reason}")]
    OutsideValidity { rho: f64, j: f64, reason: String },

    #[error("root solve did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("singular jacobian: |Delta| = {delta:e}")]
    SingularJacobian { delta: f64 },

    #[error("flux jacobian has complex eigenvalues (discriminant {discriminant:e})")]
    ComplexEigenvalues { discriminant: f64 },

    #[error("no projection is available for epsilon = {epsilon}, epsilon_tilde = {epsilon_tilde}")]
    UnsupportedCombination { epsilon: i8, epsilon_tilde: i8 },

    #[error("cell {cell} left the validity domain at t = {time}: {reason}")]
    StateLeftDomain { cell: usize, time: f64, reason: String },

    #[error("time step {dt:e} exceeds the CFL bound {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
