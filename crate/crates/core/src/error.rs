use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value outside covered range: {0}")]
    Range(String),

    #[error("integration diverged after tau = {last_tau}: {reason}")]
    Divergence { last_tau: f64, reason: String },

    #[error("right-hand side produced a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },

    #[error("aliasing: {0}")]
    Aliasing(String),

    #[error("almost-RW violation: perturbation amplitude {amplitude:e} exceeds eps_max = {eps_max:e}")]
    AlmostRw { amplitude: f64, eps_max: f64 },

    #[error("metric degenerate at grid point {index}")]
    MetricDegeneracy { index: usize },

    #[error("constraint blow-up at tau = {tau}: normalized residual {residual:e}")]
    ConstraintBlowup { tau: f64, residual: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 2 for bad input or configuration, 3 for a failed
    /// evolution, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Input(_) | Error::Aliasing(_) | Error::AlmostRw { .. } => 2,
            Error::Divergence { .. }
            | Error::NonFiniteRhs { .. }
            | Error::ConstraintBlowup { .. }
            | Error::MetricDegeneracy { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}
