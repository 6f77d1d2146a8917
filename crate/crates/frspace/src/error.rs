//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric positive-definite (lambda_min = {lambda_min:.3e}, lambda_max = {lambda_max:.3e})")]
    NotPositiveDefinite { lambda_min: f64, lambda_max: f64 },

    #[error("axis 1-form norm out of range: c = {c} must lie strictly inside (0, 1)")]
    NormOutOfRange { c: f64 },

    #[error("charge out of range: g = {g} must lie strictly inside (-2, 2)")]
    ChargeOutOfRange { g: f64 },

    #[error("shape mismatch for {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: String,
        got: String,
    },

    #[error("{what} must be symmetric (max asymmetry {max_asym:.3e})")]
    NotSymmetric { what: &'static str, max_asym: f64 },

    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("invalid sampling range for {what}: [{lo}, {hi}]")]
    BadRange {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("tangent vector must be nonzero")]
    ZeroVector,

    #[error("singular matrix in {context}")]
    SingularMatrix { context: &'static str },

    #[error("operation requires dimension 2, got {0}")]
    DimensionNotTwo(usize),

    #[error("input 1-form is not exact: max |f_mn| = {0:.3e}")]
    NotExactForm(f64),

    #[error("charge gradient must vanish: max |dg| = {0:.3e}")]
    ChargeNotConstant(f64),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("domain error: {what} in {context}")]
    Domain { what: String, context: String },

    #[error("syntax error in {location} at column {column}: {message}")]
    Syntax {
        location: String,
        column: usize,
        message: String,
    },

    #[error("field dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("metric expression matrix is not symmetric as written: entry ({i},{j}) differs from ({j},{i})")]
    AsymmetricMetric { i: usize, j: usize },

    #[error("geodesic step rejected at t = {t}: K drift {drift:.3e} exceeds {limit:.3e} (reduce dt)")]
    StepRejected { t: f64, drift: f64, limit: f64 },

    #[error("domain error during integration at t = {t} (step {step}): {message}; last valid state x = {x:?}, y = {y:?}")]
    DomainMidTrajectory {
        t: f64,
        step: usize,
        message: String,
        x: Vec<f64>,
        y: Vec<f64>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
