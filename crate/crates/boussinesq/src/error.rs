use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("multiplier is not finite at xi = {xi}")]
    NonFiniteMultiplier { xi: f64 },
    #[error("samples do not decay at the box edge (|tail| = {tail:e}, peak = {peak:e})")]
    TailViolation { tail: f64, peak: f64 },
    #[error("compatibility violated: h(0) = {value:e} must vanish for s = {s}")]
    CompatibilityViolation { value: f64, s: f64 },
    #[error("quadrature did not converge: relative change {change:e} under node doubling")]
    QuadratureNotConverged { change: f64 },
    #[error("contour quadrature did not converge: relative change {change:e} under node doubling")]
    ContourQuadratureNotConverged { change: f64 },
    #[error("degenerate data: denominator {0:e}")]
    DegenerateData(f64),
    #[error("smoothing exponent a = {a} outside the admissible range a < {limit}")]
    RangeViolation { a: f64, limit: f64 },
    #[error("no contraction: window T = {t:e} fell below 4 time steps")]
    NoContraction { t: f64 },
    #[error("finite-difference run unstable at step {step}: max |u| = {max:e}")]
    StabilityViolation { step: usize, max: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
