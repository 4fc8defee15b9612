use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested state dimension is above the exact state-vector cap.
    /// Callers should fall back to the Gaussian outcome sampler.
    #[error("dimension {dim} exceeds the exact-path cap {cap}; use the Gaussian sampler")]
    ExceedsExactCap { dim: usize, cap: usize },

    #[error("analytic moments require s^2 N >= 1, got s^2 N = {0}")]
    MomentValidity(f64),

    #[error("infeasible schedule: {0}")]
    Infeasible(String),

    #[error("numerical failure at step {step}: {msg}")]
    Numerical { step: usize, msg: String },

    #[error("trial {index}: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors that stem from user configuration rather than numerics.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::InvalidParameter(_)
            | Error::ExceedsExactCap { .. }
            | Error::MomentValidity(_)
            | Error::Infeasible(_) => true,
            Error::Trial { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
