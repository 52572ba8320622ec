use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution parameter constraint does not hold.
    #[error("invalid distribution: {0}")]
    InvalidSpec(String),

    /// A resolved scenario failed validation; one entry per offending field.
    #[error("malformed scenario: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),

    #[error("battle already terminal")]
    Terminal,

    #[error("novelty {id}: {reason}")]
    Novelty { id: String, reason: String },

    /// Campaign configuration could not be parsed or failed static checks.
    #[error("campaign config: {0}")]
    Config(String),

    #[error("metrics: {0}")]
    Metrics(String),

    #[error("unknown agent `{0}` (expected baseline or aware)")]
    UnknownAgent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn novelty(id: &str, reason: impl Into<String>) -> Self {
        Error::Novelty {
            id: id.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the user's configuration rather than by a
    /// failure while executing battles.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::InvalidScenario(_)
                | Error::Novelty { .. }
                | Error::Config(_)
                | Error::UnknownAgent(_)
        )
    }
}
