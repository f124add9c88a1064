use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid weight sequence: {0}")]
    InvalidWeights(String),
    #[error("exponent p must be a finite real >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("ratio q = {q} outside {range}")]
    InvalidRatio { q: f64, range: &'static str },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("input outside the map's domain: {0}")]
    OutOfDomain(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("uncertified: {0}")]
    Uncertified(String),
    #[error("coefficients sum to 1: every point is a generalized fixed point")]
    DegenerateFixedPoint,
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("iteration limit of {0} steps exceeded")]
    IterationLimit(usize),
}

pub(crate) fn ensure_finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}
