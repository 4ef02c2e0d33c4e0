use thiserror::Error;

/// Errors raised by bound computations and their numerical substrate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{lower}, {upper}]: error estimate {error:e} after {subdivisions} subdivisions")]
    NonConvergence {
        lower: f64,
        upper: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("root bracket expansion failed to straddle target {target} (last bracket [{lo}, {hi}])")]
    BracketFailure { target: f64, lo: f64, hi: f64 },

    #[error("distortion D = {d} is infeasible: must exceed 2^(-C/KM) = {d_min}")]
    InfeasibleDistortion { d: f64, d_min: f64 },

    #[error("insufficient bottleneck capacity: {0}")]
    InsufficientBottleneck(String),

    #[error("divergent statistic: {0}")]
    DivergentStatistic(String),

    #[error("only {accepted} samples accepted, at least {required} required")]
    InsufficientAcceptance { accepted: usize, required: usize },

    #[error("{cells} joint-entropy cells need at least {required} samples, got {samples}")]
    CellExplosion {
        cells: usize,
        samples: usize,
        required: usize,
    },

    #[error("unsupported limit: {0}")]
    UnsupportedLimit(String),
}

impl Error {
    /// True for errors caused by the request itself rather than a numerical failure.
    pub fn is_domain(&self) -> bool {
        !matches!(
            self,
            Error::NonConvergence { .. }
                | Error::BracketFailure { .. }
                | Error::InsufficientAcceptance { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
