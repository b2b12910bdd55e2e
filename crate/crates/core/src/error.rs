use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The implicit diffusion step produced a negative value below the undershoot tolerance;
    /// the step must be retried with a smaller time increment.
    #[error("undershoot: min F = {min:e} below tolerance (max F = {max:e})")]
    Undershoot { min: f64, max: f64 },

    #[error("initial data: {0}")]
    InitialData(String),

    #[error("fit rejected: {0}")]
    Fit(String),

    #[error("classification: {0}")]
    Regime(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
