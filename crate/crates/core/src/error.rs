use thiserror::Error;

/// Errors raised by geometry evaluation, the flow solver and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chart violation: point {coords:?} lies outside the chart of {model}")]
    ChartViolation { model: String, coords: Vec<f64> },

    #[error("induced metric is singular or contains non-finite entries")]
    SingularMetric,

    #[error("symmetric eigensolver failed to converge")]
    EigenFailure,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("chart exit at grid point {index} (t = {t}): {coords:?}")]
    ChartExit {
        index: usize,
        t: f64,
        coords: Vec<f64>,
    },

    #[error("numerical blow-up (NaN/Inf) at grid point {index} (t = {t})")]
    NumericalBlowup { index: usize, t: f64 },

    #[error("range violation: {0}")]
    RangeViolation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerical integration itself (as opposed to
    /// bad input).
    pub fn is_numerical_failure(&self) -> bool {
        matches!(
            self,
            Error::ChartExit { .. } | Error::NumericalBlowup { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
