use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("ill-posed fit: {0}")]
    IllPosedFit(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("no telemetry frame available")]
    NoData,

    #[error("frame decode failed: {0}")]
    Decode(#[from] crate::stream::DecodeError),

    #[error("unknown impedance preset `{name}` (valid presets: {})", valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<String> },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
