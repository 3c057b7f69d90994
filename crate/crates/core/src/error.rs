use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {x} lies outside the domain {domain}")]
    Domain { x: f64, domain: &'static str },

    #[error("truncation residual {residual:e} exceeds tolerance {tolerance:e}")]
    Truncation { residual: f64, tolerance: f64 },

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate density: {0}")]
    DegenerateDensity(String),

    #[error("density vanishes at x = {x}; normalized kernel undefined")]
    DivisionDomain { x: f64 },

    #[error("design matrix is rank deficient (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    #[error("sampling nodes are not distinct")]
    CoincidentNodes,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown bound `{0}`")]
    UnknownBound(String),

    #[error("missing bound input `{0}`")]
    MissingInput(&'static str),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Trial-level failures that are recorded as flagged trials rather than aborting a run.
    pub fn is_flaggable(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::DegenerateDensity(_) | Error::CoincidentNodes
        )
    }
}
