use thiserror::Error;

/// Errors raised by the radial Monge-Ampère toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("profile is not convex at index {index} (second divided difference {value:.3e})")]
    NonConvex { index: usize, value: f64 },
    #[error("profile is not nondecreasing at index {index} (forward difference {value:.3e})")]
    NonMonotone { index: usize, value: f64 },
    #[error("profile does not vanish on the boundary: g(0) = {value:.3e}")]
    BoundaryNotZero { value: f64 },
    #[error("eps = {eps:.3e} puts the shoulder log(eps^2) below t_min = {t_min}")]
    EpsTooSmall { eps: f64, t_min: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("profile has infinite Monge-Ampère energy")]
    InfiniteEnergy,
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("volume bound violated at s = {s:.6e}: V(s) = {volume:.6e} > bound {bound:.6e}")]
    VolumeBoundViolated { s: f64, volume: f64, bound: f64 },
    #[error("hypothesis fails at grid point {at:.6e}: lhs {lhs:.6e} > rhs {rhs:.6e}")]
    HypothesisFails { at: f64, lhs: f64, rhs: f64 },
    #[error("profile is not normalized to unit Monge-Ampère mass (mass {mass:.6e})")]
    NotNormalized { mass: f64 },
    #[error("measure is not a probability measure (total {total:.6e})")]
    NotProbability { total: f64 },
    #[error("mass a = {a} outside (0, {limit})")]
    MassOutOfRange { a: f64, limit: f64 },
    #[error("solver did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("continuation failed at path index {index}: {source}")]
    ContinuationFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse split used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Inputs violate a precondition.
    Validation,
    /// Valid inputs where the computation itself failed or diverged.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Divergent(_) | Error::NoConvergence { .. } | Error::InfiniteEnergy => ErrorClass::Numerical,
            Error::ContinuationFailed { source, .. } => source.class(),
            _ => ErrorClass::Validation,
        }
    }
}
