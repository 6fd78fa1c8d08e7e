use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a physical or structural invariant (non-Hermitian
    /// matrix, unnormalized state, negative rate, ...).
    #[error("model violation: {0}")]
    ModelViolation(String),

    /// Two consecutive vectors are (numerically) orthogonal, so no phase
    /// connection between them exists.
    #[error("gauge discontinuity: overlap magnitude {overlap:.3e} between consecutive vectors")]
    GaugeDiscontinuity { overlap: f64 },

    #[error("integrator failure at t = {time:.6}: {reason}; retry with step <= {suggested_step:.3e}")]
    IntegratorFailure { time: f64, reason: String, suggested_step: f64 },

    #[error("no convergence to a steady state within t = {horizon} (residual {residual:.3e})")]
    Timeout { horizon: f64, residual: f64 },

    #[error("ambiguous triangulation at sample {index}: antipodal to its neighbour or to the reference pole")]
    AmbiguousTriangulation { index: usize },

    #[error("no unique geodesic between antipodal points")]
    NoUniqueGeodesic,

    #[error("config error{}: {message}", if *line > 0 { format!(" at line {line}") } else { String::new() })]
    Config { line: usize, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::ModelViolation(msg.into())
    }

    /// Configuration problems map to exit status 2, numerical ones to 3.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Usage(_))
    }
}
