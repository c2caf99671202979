use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e} > {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("non-finite entry in {0}")]
    NonFinite(String),

    #[error(
        "quadrature did not converge on [{a}, {b}]: estimated error {error:.3e} > target {target:.3e} after {intervals} subintervals"
    )]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        error: f64,
        target: f64,
        intervals: usize,
    },

    #[error("bath correlation of model `{0}` is a distribution and cannot be sampled pointwise")]
    Distributional(&'static str),

    #[error("integrator step size collapsed to {step:.3e} at t = {t}")]
    StepCollapse { t: f64, step: f64 },

    #[error("trace drift {drift:.3e} at t = {t} exceeds abort threshold {limit:.1e}")]
    TraceDrift { t: f64, drift: f64, limit: f64 },

    #[error("not completely positive at this order: eigenvalue {eigenvalue:.3e} below -{tolerance:.3e}")]
    NotCompletelyPositive { eigenvalue: f64, tolerance: f64 },

    #[error("outside Born validity at t = {t}: p(t) = {p:.6e} not in [0, 1]")]
    OutsideValidity { t: f64, p: f64 },

    #[error("Fock truncation insufficient: {0}")]
    TruncationInsufficient(String),

    #[error("combined dimension {dim} exceeds the guard of {limit}")]
    DimensionGuard { dim: usize, limit: usize },

    /// Malformed or inconsistent scenario file; `location` is a JSON path
    /// and, for syntax errors, a line/column.
    #[error("scenario error at {location}: {message}")]
    Scenario { location: String, message: String },

    #[error("run `{run}` failed: {source}")]
    RunFailed { run: String, source: Box<Error> },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
