use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or coordinate lies outside its admissible interval.
    #[error("parameter `{param}` = {value} is outside its domain {domain}")]
    Domain {
        param: String,
        value: f64,
        domain: String,
    },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("no closed-form Fisher metric registered for family `{0}`")]
    UnsupportedFamily(String),

    /// Successive quadrature refinements disagree by more than the requested tolerance.
    #[error("quadrature did not converge: coarse {coarse:?}, fine {fine:?} (tolerance {tol:e})")]
    Accuracy {
        coarse: Vec<f64>,
        fine: Vec<f64>,
        tol: f64,
    },

    #[error("metric is singular at {point:?}")]
    SingularMetric { point: Vec<f64> },

    /// Richardson check on the curvature pipeline failed.
    #[error("finite-difference curvature inconsistent: scalar {coarse} at h vs {fine} at h/2")]
    InconsistentCurvature { coarse: f64, fine: f64 },

    /// Adaptive step size collapsed, usually next to a metric singularity.
    #[error("step size underflow at tau = {tau}; last valid state {state:?}")]
    Singularity { tau: f64, state: Vec<f64> },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("operation not applicable: {0}")]
    Inapplicable(String),

    #[error("{what} = {requested} exceeds the configured maximum {max}")]
    Resource {
        what: String,
        requested: usize,
        max: usize,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    /// Least-squares fit was too ill-conditioned to trust.
    #[error("ill-conditioned fit (condition estimate {condition:e}); {hint}")]
    IllConditioned { condition: f64, hint: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
